"""Exact arithmetic in a real quadratic field F = Q(sqrt(D)) and linear algebra over it.

Every geometric decision in the package (half-space tests, lattice membership,
cone feasibility) reduces to exact sign computations on scalars of the form
a + b*sqrt(D) with rational a, b.  Floating point is never consulted; decimal
digits are produced only at rendering time via `QF.decimal`.
"""

from __future__ import annotations

import math
import re

from gmpy2 import mpq

from .errors import NoSolutionError, QFieldError, SingularMatrixError

_SQUAREFREE_CACHE: dict[int, bool] = {}


def _is_squarefree(n: int) -> bool:
    if n in _SQUAREFREE_CACHE:
        return _SQUAREFREE_CACHE[n]
    ok = True
    m = n
    d = 2
    while d * d <= m:
        if m % (d * d) == 0:
            ok = False
            break
        if m % d == 0:
            m //= d
        d += 1
    _SQUAREFREE_CACHE[n] = ok
    return ok


class QF:
    """An element a + b*sqrt(D) of Q(sqrt(D)), D squarefree >= 2.

    Immutable; rational coefficients are mpq values (always in lowest terms
    with positive denominator).  Mixing two elements with distinct D and both
    irrational parts nonzero raises QFieldError.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D: int = 2):
        object.__setattr__(self, "a", mpq(a))
        object.__setattr__(self, "b", mpq(b))
        object.__setattr__(self, "D", int(D))
        if self.D < 2 or not _is_squarefree(self.D):
            raise QFieldError(f"discriminant must be squarefree >= 2, got {D}")

    def __setattr__(self, name, value):
        raise AttributeError("QF values are immutable")

    # -- coercion -----------------------------------------------------------

    def _coerce(self, other) -> "QF":
        if isinstance(other, QF):
            if other.b != 0 and self.b != 0 and other.D != self.D:
                raise QFieldError(f"mixed discriminants {self.D} and {other.D}")
            return other
        return QF(other, 0, self.D)

    def _join_D(self, other: "QF") -> int:
        if self.b != 0:
            return self.D
        if other.b != 0:
            return other.D
        return self.D

    # -- ring / field operations --------------------------------------------

    def __add__(self, other) -> "QF":
        o = self._coerce(other)
        return QF(self.a + o.a, self.b + o.b, self._join_D(o))

    __radd__ = __add__

    def __neg__(self) -> "QF":
        return QF(-self.a, -self.b, self.D)

    def __sub__(self, other) -> "QF":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "QF":
        return (-self) + self._coerce(other)

    def __mul__(self, other) -> "QF":
        o = self._coerce(other)
        D = self._join_D(o)
        return QF(self.a * o.a + D * self.b * o.b, self.a * o.b + self.b * o.a, D)

    __rmul__ = __mul__

    def inverse(self) -> "QF":
        n = self.a * self.a - self.D * self.b * self.b
        if n == 0:
            if self.a == 0 and self.b == 0:
                raise QFieldError("division by zero")
            # a^2 = D b^2 with a, b nonzero would make sqrt(D) rational
            raise QFieldError(f"norm vanished for nonzero element; D={self.D} not squarefree?")
        return QF(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other) -> "QF":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "QF":
        return self._coerce(other) * self.inverse()

    def conjugate(self) -> "QF":
        return QF(self.a, -self.b, self.D)

    # -- exact order ---------------------------------------------------------

    def sign(self) -> int:
        """Sign of the real value a + b*sqrt(D), decided by integer comparisons."""
        a, b = self.a, self.b
        if b == 0:
            return 0 if a == 0 else (1 if a > 0 else -1)
        if a == 0:
            return 1 if b > 0 else -1
        sa = 1 if a > 0 else -1
        sb = 1 if b > 0 else -1
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with D b^2
        aa = a * a
        dbb = self.D * b * b
        if aa == dbb:
            raise QFieldError(f"sqrt({self.D}) behaved rationally; invalid discriminant")
        return sa if aa > dbb else sb

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except (QFieldError, TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.D if self.b != 0 else 0))

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def floor(self) -> int:
        """Greatest integer <= a + b*sqrt(D), exact."""
        # write x = (p1 + p2*sqrt(D)) / q with integer p1, p2 and q > 0
        qa, qb = self.a.denominator, self.b.denominator
        q = qa * qb // math.gcd(qa, qb)
        p1 = self.a.numerator * (q // qa)
        p2 = self.b.numerator * (q // qb)
        if p2 >= 0:
            m = math.isqrt(p2 * p2 * self.D)
        else:
            # sqrt irrational for p2 != 0, so floor(p2 sqrt(D)) = -isqrt(..) - 1
            m = -math.isqrt(p2 * p2 * self.D) - 1
        return (p1 + m) // q

    # -- rendering -----------------------------------------------------------

    def decimal(self, digits: int = 15) -> str:
        """Decimal string with `digits` digits after the point, rounded toward -inf.

        Deterministic (integer arithmetic only); used at the rendering boundary.
        """
        scale = 10**digits
        n = (self * scale).floor()
        sign = "-" if n < 0 else ""
        n = abs(n) if n >= 0 else -n
        whole, frac = divmod(n, scale)
        return f"{sign}{whole}.{str(frac).zfill(digits)}"

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.D)

    def __repr__(self) -> str:
        return f"QF({self.a!r}, {self.b!r}, D={self.D})"

    def __str__(self) -> str:
        return format_qf(self)


# -- textual form -------------------------------------------------------------

_ROOT_TERM = re.compile(
    r"^(?P<sign>[+-]?)(?P<coef>\d+(?:/\d+)?)?√(?P<disc>\d+)(?:/(?P<den>\d+))?$"
)
_RAT_TERM = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def format_qf(x: QF) -> str:
    """Canonical textual form, e.g. "1", "-1/2√2", "3+2√2"; round-trips exactly."""
    if x.b == 0:
        return str(x.a)
    root = f"√{x.D}" if abs(x.b) == 1 else f"{abs(x.b)}√{x.D}"
    if x.a == 0:
        return root if x.b > 0 else f"-{root}"
    op = "+" if x.b > 0 else "-"
    return f"{x.a}{op}{root}"


def _split_terms(text: str) -> list[str]:
    terms = []
    start = 0
    for i, ch in enumerate(text):
        if ch in "+-" and i > start:
            terms.append(text[start:i])
            start = i
    terms.append(text[start:])
    return terms


def parse_qf(text: str, D: int) -> QF:
    """Parse the textual scalar form.

    Accepts both coefficient placements, "r/s√D" and "√D/s" (the latter occurs
    in hand-written configs), with an optional rational term on either side.
    """
    s = text.replace(" ", "")
    if not s:
        raise QFieldError("empty scalar")
    a = mpq(0)
    b = mpq(0)
    seen_root = False
    for term in _split_terms(s):
        if _RAT_TERM.match(term):
            a += mpq(term)
            continue
        m = _ROOT_TERM.match(term)
        if not m:
            raise QFieldError(f"cannot parse scalar {text!r}")
        if seen_root:
            raise QFieldError(f"two irrational terms in {text!r}")
        seen_root = True
        if int(m.group("disc")) != D:
            raise QFieldError(
                f"scalar {text!r} uses √{m.group('disc')} but the context has D={D}"
            )
        coef = mpq(m.group("coef")) if m.group("coef") else mpq(1)
        if m.group("den"):
            coef /= mpq(m.group("den"))
        if m.group("sign") == "-":
            coef = -coef
        b += coef
    return QF(a, b, D)


# -- vectors ------------------------------------------------------------------
#
# Vectors are plain tuples of QF; the helpers below keep call sites readable.


def qv(entries, D: int) -> tuple[QF, ...]:
    return tuple(x if isinstance(x, QF) else QF(x, 0, D) for x in entries)


def qv_add(u, v):
    return tuple(x + y for x, y in zip(u, v, strict=True))


def qv_sub(u, v):
    return tuple(x - y for x, y in zip(u, v, strict=True))


def qv_neg(u):
    return tuple(-x for x in u)


def qv_scale(c, u):
    return tuple(c * x for x in u)


def qv_dot(u, v) -> QF:
    acc = None
    for x, y in zip(u, v, strict=True):
        acc = x * y if acc is None else acc + x * y
    if acc is None:
        raise QFieldError("dot product of empty vectors")
    return acc


def qv_norm2(u) -> QF:
    return qv_dot(u, u)


def qv_is_zero(u) -> bool:
    return all(x.is_zero() for x in u)


class QFMatrix:
    """Dense matrix over Q(sqrt(D)) with exact Gaussian elimination.

    Rows are tuples of QF; dimensions are fixed at construction.  All
    operations are pure and deterministic (first-nonzero pivot selection).
    """

    __slots__ = ("rows", "nrows", "ncols", "D")

    def __init__(self, rows, D: int | None = None):
        self.rows = tuple(tuple(r) for r in rows)
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else 0
        for r in self.rows:
            if len(r) != self.ncols:
                raise QFieldError("ragged matrix")
        if D is None:
            if not self.rows:
                raise QFieldError("need explicit D for an empty matrix")
            D = self.rows[0][0].D
        self.D = D

    @classmethod
    def identity(cls, n: int, D: int) -> "QFMatrix":
        one, zero = QF(1, 0, D), QF(0, 0, D)
        return cls(
            [[one if i == j else zero for j in range(n)] for i in range(n)], D
        )

    def column(self, j: int) -> tuple[QF, ...]:
        return tuple(r[j] for r in self.rows)

    def transpose(self) -> "QFMatrix":
        return QFMatrix(
            [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
            self.D,
        )

    def matvec(self, v) -> tuple[QF, ...]:
        return tuple(qv_dot(r, v) for r in self.rows)

    def matmul(self, other: "QFMatrix") -> "QFMatrix":
        cols = [other.column(j) for j in range(other.ncols)]
        return QFMatrix(
            [[qv_dot(r, c) for c in cols] for r in self.rows], self.D
        )

    def _rref(self):
        """Reduced row echelon form; returns (rows, pivot column list)."""
        rows = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.ncols):
            pr = next((i for i in range(r, len(rows)) if rows[i][c].sign() != 0), None)
            if pr is None:
                continue
            rows[r], rows[pr] = rows[pr], rows[r]
            inv = rows[r][c].inverse()
            rows[r] = [x * inv for x in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c].sign() != 0:
                    f = rows[i][c]
                    rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
        return rows, pivots

    def rank(self) -> int:
        return len(self._rref()[1])

    def kernel_basis(self) -> list[tuple[QF, ...]]:
        """Deterministic basis of the right kernel {v : M v = 0}."""
        rows, pivots = self._rref()
        free = [c for c in range(self.ncols) if c not in pivots]
        zero, one = QF(0, 0, self.D), QF(1, 0, self.D)
        basis = []
        for f in free:
            v = [zero] * self.ncols
            v[f] = one
            for r, p in enumerate(pivots):
                v[p] = -rows[r][f]
            basis.append(tuple(v))
        return basis

    def solve(self, rhs) -> tuple[QF, ...]:
        """One exact solution of M x = rhs; raises NoSolutionError if none exists."""
        aug = QFMatrix(
            [list(r) + [v] for r, v in zip(self.rows, rhs, strict=True)], self.D
        )
        rows, pivots = aug._rref()
        if self.ncols in pivots:
            raise NoSolutionError("inconsistent linear system")
        zero = QF(0, 0, self.D)
        x = [zero] * self.ncols
        for r, p in enumerate(pivots):
            x[p] = rows[r][self.ncols]
        return tuple(x)

    def inverse(self) -> "QFMatrix":
        if self.nrows != self.ncols:
            raise SingularMatrixError("inverse of a non-square matrix")
        n = self.nrows
        ident = QFMatrix.identity(n, self.D)
        aug = QFMatrix(
            [list(self.rows[i]) + list(ident.rows[i]) for i in range(n)], self.D
        )
        rows, pivots = aug._rref()
        if pivots != list(range(n)):
            raise SingularMatrixError("matrix is singular")
        return QFMatrix([r[n:] for r in rows], self.D)

    def __eq__(self, other) -> bool:
        return isinstance(other, QFMatrix) and self.rows == other.rows

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.rows)
        return f"QFMatrix[{body}]"
