"""Stratification of internal space by a central hyperplane family.

A cone type is a total sign vector on the (ordered, normalized) hyperplane
family; the feasible ones stratify R^n into relatively open cones.  Together
with the left-dominant composition law they form an idempotent semigroup whose
order, ideals and products are computed here, exactly.
"""

from __future__ import annotations

from gmpy2 import mpq

from .errors import InvariantViolationError, ValidationError
from .qfield import QF, QFMatrix, qv_add, qv_dot, qv_scale

Sign = int  # -1, 0, +1

_SIGN_CHAR = {-1: "-", 0: "0", 1: "+"}
_CHAR_SIGN = {v: k for k, v in _SIGN_CHAR.items()}
# enumeration (and textual sort) order of the three symbols
_SIGN_ORDER = (-1, 0, 1)


def cone_type_str(signs: tuple[Sign, ...]) -> str:
    return "".join(_SIGN_CHAR[s] for s in signs)


def parse_cone_type(text: str) -> tuple[Sign, ...]:
    try:
        return tuple(_CHAR_SIGN[ch] for ch in text)
    except KeyError:
        raise ValidationError(f"bad cone type string {text!r}") from None


def simplex_feasible(
    eq_rows: list[tuple[QF, ...]],
    ineq_rows: list[tuple[QF, ...]],
    nvars: int,
    D: int,
) -> tuple[QF, ...] | None:
    """Exact Phase-I simplex with Bland's rule.

    Decides feasibility of {e.x = 0 for e in eq_rows; g.x >= 1 for g in
    ineq_rows} over Q(sqrt(D))^nvars and returns a witness when feasible.
    Strict cone inequalities are normalized to >= 1 by homogeneity.
    """
    zero, one = QF(0, 0, D), QF(1, 0, D)
    rows = [list(r) for r in eq_rows] + [list(r) for r in ineq_rows]
    m = len(rows)
    if m == 0:
        return tuple(zero for _ in range(nvars))
    nsurplus = len(ineq_rows)
    ncols = 2 * nvars + nsurplus + m  # x+, x-, surplus, artificial
    tableau: list[list[QF]] = []
    rhs: list[QF] = []
    for i, row in enumerate(rows):
        t = [zero] * ncols
        for j in range(nvars):
            t[j] = row[j]
            t[nvars + j] = -row[j]
        if i >= len(eq_rows):
            t[2 * nvars + (i - len(eq_rows))] = -one
        t[2 * nvars + nsurplus + i] = one
        b = zero if i < len(eq_rows) else one
        tableau.append(t)
        rhs.append(b)
    basis = [2 * nvars + nsurplus + i for i in range(m)]
    # Phase-I objective: minimize the sum of artificials; expressed through the
    # non-artificial columns, decreasing whenever a column sum is positive.
    obj = [zero] * ncols
    objv = zero
    for i in range(m):
        for j in range(ncols):
            obj[j] = obj[j] + tableau[i][j]
        objv = objv + rhs[i]
    for i in range(m):
        obj[basis[i]] = zero

    while True:
        enter = next(
            (j for j in range(ncols) if obj[j].sign() > 0 and j not in basis), None
        )
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = tableau[i][enter]
            if a.sign() > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            raise InvariantViolationError("phase-I objective unbounded")
        piv = tableau[leave][enter]
        inv = piv.inverse()
        tableau[leave] = [x * inv for x in tableau[leave]]
        rhs[leave] = rhs[leave] * inv
        for i in range(m):
            if i != leave and tableau[i][enter].sign() != 0:
                f = tableau[i][enter]
                tableau[i] = [x - f * y for x, y in zip(tableau[i], tableau[leave])]
                rhs[i] = rhs[i] - f * rhs[leave]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, tableau[leave])]
        objv = objv - f * rhs[leave]
        basis[leave] = enter

    if objv.sign() != 0:
        return None
    x = [zero] * nvars
    for i, v in enumerate(basis):
        if v < nvars:
            x[v] = x[v] + rhs[i]
        elif v < 2 * nvars:
            x[v - nvars] = x[v - nvars] - rhs[i]
    return tuple(x)


class FaceSemigroup:
    """All feasible cone types over an ordered hyperplane family.

    Carries an interior witness and dimension per cone, the composition
    product with closure checking, the facet order, and the ideal structure.
    """

    def __init__(self, normals: list[tuple[QF, ...]], D: int):
        if not normals:
            raise ValidationError("empty hyperplane family")
        self.normals = [tuple(a) for a in normals]
        self.D = D
        self.n = len(normals[0])
        self.cones: list[tuple[Sign, ...]] = []
        self.witness: dict[tuple[Sign, ...], tuple[QF, ...]] = {}
        self._enumerate()
        self.index = {t: i for i, t in enumerate(self.cones)}
        self.dims = {t: self.cone_dim(t) for t in self.cones}
        for a in self.cones:
            for b in self.cones:
                if self.product(a, b) not in self.index:
                    raise InvariantViolationError("face semigroup not closed")

    # -- enumeration ----------------------------------------------------------

    def _system(self, signs: tuple[Sign, ...]):
        eqs, ineqs = [], []
        for s, a in zip(signs, self.normals):
            if s == 0:
                eqs.append(a)
            else:
                ineqs.append(qv_scale(QF(s, 0, self.D), a))
        return eqs, ineqs

    def feasible(self, signs: tuple[Sign, ...]) -> tuple[QF, ...] | None:
        eqs, ineqs = self._system(signs)
        return simplex_feasible(eqs, ineqs, self.n, self.D)

    def _enumerate(self):
        k = len(self.normals)

        def rec(prefix: tuple[Sign, ...]):
            w = self.feasible(prefix)
            if w is None:
                return
            if len(prefix) == k:
                self.cones.append(prefix)
                self.witness[prefix] = w
                return
            for s in _SIGN_ORDER:
                rec(prefix + (s,))

        rec(())

    def cone_dim(self, t: tuple[Sign, ...]) -> int:
        zero_rows = [self.normals[i] for i, s in enumerate(t) if s == 0]
        if not zero_rows:
            return self.n
        return self.n - QFMatrix(zero_rows, self.D).rank()

    # -- semigroup structure ---------------------------------------------------

    @property
    def identity(self) -> tuple[Sign, ...]:
        return tuple(0 for _ in self.normals)

    def product(self, t: tuple[Sign, ...], u: tuple[Sign, ...]) -> tuple[Sign, ...]:
        """Left-dominant composition: keep t's sign unless it vanishes."""
        out = tuple(us if ts == 0 else ts for ts, us in zip(t, u))
        if hasattr(self, "index") and out not in self.index:
            raise InvariantViolationError(
                f"product {cone_type_str(t)}*{cone_type_str(u)} left the semigroup"
            )
        return out

    def leq(self, t: tuple[Sign, ...], u: tuple[Sign, ...]) -> bool:
        """t <= u iff the cone of u is a facet of (or equals) the cone of t."""
        return t == self.product(u, t)

    def chambers(self) -> list[tuple[Sign, ...]]:
        return [t for t in self.cones if 0 not in t]

    def minimal_ideal(self, restrict=None) -> list[tuple[Sign, ...]]:
        pool = self.cones if restrict is None else [t for t in self.cones if t in restrict]
        return [t for t in pool if 0 not in t]

    def is_right_ideal(self, subset, restrict=None) -> bool:
        pool = self.cones if restrict is None else list(restrict)
        sub = set(subset)
        return all(self.product(t, s) in sub for t in sub for s in pool)

    def principal_right_ideals(self, restrict=None):
        pool = self.cones if restrict is None else list(restrict)
        return {t: frozenset(self.product(t, s) for s in pool) for t in pool}

    def geometric_product_oracle(
        self, t: tuple[Sign, ...], u: tuple[Sign, ...]
    ) -> tuple[Sign, ...]:
        """Product recomputed from geometry, independent of the sign formula.

        The product cone is the one containing a small head of the second cone
        shifted by a small vector of the first; the shift scale shrinks until
        the resulting sign vector stabilizes twice in a row.
        """
        zero = QF(0, 0, self.D)
        base = self.witness[t] if t != self.identity else tuple(zero for _ in range(self.n))
        head = self.witness[u]
        # each sign flips at most once as delta shrinks, at -a.base / a.head;
        # halve until below every positive flip point, then confirm twice
        delta = mpq(1)
        for a in self.normals:
            num, den = qv_dot(a, base), qv_dot(a, head)
            if num.sign() != 0 and den.sign() != 0 and num.sign() != den.sign():
                crit = -num / den
                while QF(delta, 0, self.D) >= crit:
                    delta /= 2
        prev = None
        for _ in range(2):
            p = qv_add(base, qv_scale(QF(delta, 0, self.D), head))
            signs = tuple(qv_dot(a, p).sign() for a in self.normals)
            if prev is not None and signs != prev:
                raise InvariantViolationError("geometric product did not stabilize")
            prev = signs
            delta /= 2
        return prev

    def __len__(self) -> int:
        return len(self.cones)
