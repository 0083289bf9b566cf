"""Closure structure of finitely generated subgroups of R^m with F-entries.

The key computation splits the span of a cone's lattice trace into a part V
along which the trace is dense and an orthogonal part D on which it projects
to a discrete lattice.  V decides density, non-trivial cones, and allowed
translations; D yields a certified discreteness radius.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from gmpy2 import mpq

from .arrangement import FaceSemigroup, simplex_feasible
from .cps import FaceData, Scheme
from .errors import ValidationError
from .qfield import QF, QFMatrix, qv_dot
from .zmodule import (
    clear_denominators,
    coset_meets_subspace,
    discrete_group_basis,
    int_kernel,
    rational_below_sqrt,
    shortest_vector_norm2,
    split_to_rational,
)


@dataclass(frozen=True)
class FGSubgroup:
    """Generators of a subgroup of R^n, inside an ambient F-subspace L."""

    ambient_basis: tuple[tuple[QF, ...], ...]
    generators: tuple[tuple[QF, ...], ...]
    n: int
    D: int

    @classmethod
    def full_space(cls, generators, n: int, D: int) -> "FGSubgroup":
        basis = tuple(QFMatrix.identity(n, D).rows)
        return cls(basis, tuple(tuple(g) for g in generators), n, D)

    @classmethod
    def on_line(cls, values, D: int) -> "FGSubgroup":
        """Subgroup of R^1 generated by scalar values."""
        return cls.full_space([(v,) for v in values], 1, D)


@dataclass(frozen=True)
class ClosureDecomposition:
    """Splitting span = V + D with dense trace along V and discrete trace in D.

    V is canonical; D is fixed as the orthogonal complement of V inside the
    ambient subspace, and latticeDV is a lattice basis of the projection of
    the group onto D (a supergroup of the D-trace, discrete all the same).
    """

    V_basis: tuple[tuple[QF, ...], ...]
    D_basis: tuple[tuple[QF, ...], ...]
    dualY: tuple[tuple[QF, ...], ...]
    latticeDV: tuple[tuple[QF, ...], ...]

    @property
    def dense(self) -> bool:
        return not self.dualY


def _span_basis(vectors, dim, D):
    """Deterministic basis of the span, via reduced echelon form."""
    vecs = [v for v in vectors if any(x.sign() != 0 for x in v)]
    if not vecs:
        return []
    mat = QFMatrix(vecs, D)
    rows, pivots = mat._rref()
    return [tuple(rows[i]) for i in range(len(pivots))]


def closure_decompose(group: FGSubgroup) -> ClosureDecomposition:
    D = group.D
    basis = list(group.ambient_basis)
    l = len(basis)
    if l == 0:
        return ClosureDecomposition((), (), (), ())
    ambient = QFMatrix(basis, D).transpose()  # columns are the L-basis
    coords = [ambient.solve(g) for g in group.generators]
    k = len(coords)
    zero = QF(0, 0, D)
    if k == 0 or all(all(x.sign() == 0 for x in c) for c in coords):
        # trivial group: nothing is dense, all of L is a discrete direction
        return ClosureDecomposition((), tuple(basis), tuple(QFMatrix.identity(l, D).rows), ())
    M = QFMatrix([[coords[j][i] for j in range(k)] for i in range(l)], D)  # l x k

    # rational subspace of the rowspace: annihilate the nullspace equations
    null = M.kernel_basis()
    rat_rows = []
    for nv in null:
        rat_rows.append([x.a for x in nv])
        rat_rows.append([x.b for x in nv])
    if rat_rows:
        lam = int_kernel(clear_denominators([[mpq(v) for v in row] for row in rat_rows]))
    else:
        lam = [[1 if i == j else 0 for i in range(k)] for j in range(k)]
    MT = M.transpose()
    particular = []
    for col in lam:
        v = tuple(QF(col[i], 0, D) for i in range(k))
        particular.append(MT.solve(v))
    left_kernel = MT.kernel_basis()
    dual = _span_basis(list(particular) + list(left_kernel), l, D)

    if not dual:
        v_coords = list(QFMatrix.identity(l, D).rows)
    else:
        v_coords = QFMatrix(dual, D).kernel_basis()
    V_basis = [ambient.matvec(v) for v in v_coords]

    if not V_basis:
        d_coords = list(QFMatrix.identity(l, D).rows)
    else:
        rows = [
            tuple(qv_dot(vb, ambient.column(j)) for j in range(l))
            for vb in V_basis
        ]
        d_coords = QFMatrix(rows, D).kernel_basis()
    D_basis = [ambient.matvec(y) for y in d_coords]

    lattice = []
    if D_basis:
        proj = QFMatrix(list(V_basis) + list(D_basis), D).transpose()
        for g in group.generators:
            alpha = proj.solve(g)
            dpart = tuple(
                sum(
                    (D_basis[t][i] * alpha[len(V_basis) + t] for t in range(len(D_basis))),
                    zero,
                )
                for i in range(group.n)
            )
            lattice.append(dpart)
        lattice = discrete_group_basis(
            [v for v in lattice if any(x.sign() != 0 for x in v)], D
        )
    return ClosureDecomposition(
        tuple(V_basis), tuple(D_basis), tuple(dual), tuple(lattice)
    )


def is_dense(group: FGSubgroup) -> bool:
    """True iff the group is dense in its ambient subspace."""
    dec = closure_decompose(group)
    return len(dec.V_basis) == len(group.ambient_basis)


@dataclass(frozen=True)
class PlainConeData:
    """Restriction of a cone to the dense direction of its span."""

    V_basis: tuple[tuple[QF, ...], ...]
    witness: tuple[QF, ...]
    radius: mpq


class ConeGeometry:
    """Per-cone-type closure data for a scheme and hyperplane family."""

    def __init__(self, scheme: Scheme, face_data: FaceData, semigroup: FaceSemigroup):
        self.scheme = scheme
        self.face_data = face_data
        self.semigroup = semigroup
        self.D = scheme.D
        self.n = scheme.n
        self._dec_cache: dict[tuple[int, ...], ClosureDecomposition] = {}
        self._plain_cache: dict[tuple[int, ...], PlainConeData | None] = {}

    # -- cone span and lattice trace ------------------------------------------

    def span_basis(self, t) -> list[tuple[QF, ...]]:
        zero_rows = [
            self.face_data.normals[i] for i, s in enumerate(t) if s == 0
        ]
        if not zero_rows:
            return list(QFMatrix.identity(self.n, self.D).rows)
        return QFMatrix(zero_rows, self.D).kernel_basis()

    def trace_lattice_m(self, span) -> list[list[int]]:
        """Lattice coordinates whose star images lie in the given subspace."""
        if len(span) == self.n:
            return [
                [1 if i == j else 0 for i in range(self.scheme.r)]
                for j in range(self.scheme.r)
            ]
        if not span:
            ann = list(QFMatrix.identity(self.n, self.D).rows)
        else:
            ann = QFMatrix(span, self.D).kernel_basis()
        star_rows = self.scheme.star_rows()
        rows = []
        for a in ann:
            rows.append(
                tuple(
                    sum(
                        (a[i] * star_rows[i][j] for i in range(self.n)),
                        QF(0, 0, self.D),
                    )
                    for j in range(self.scheme.r)
                )
            )
        srows, _ = split_to_rational(rows, None)
        return int_kernel(clear_denominators(srows))

    def lattice_trace_generators(self, span) -> list[tuple[QF, ...]]:
        """Generators of the star-image points lying in the given subspace."""
        return [self.scheme.star(mv) for mv in self.trace_lattice_m(span)]

    def decomposition(self, t) -> ClosureDecomposition:
        t = tuple(t)
        if t not in self._dec_cache:
            span = self.span_basis(t)
            gens = self.lattice_trace_generators(span)
            sub = FGSubgroup(tuple(span), tuple(gens), self.n, self.D)
            self._dec_cache[t] = closure_decompose(sub)
        return self._dec_cache[t]

    # -- cone-level predicates ---------------------------------------------------

    def nontrivial(self, t) -> bool:
        """Whether lattice star points accumulate at the cone's vertex.

        The all-zero type is declared non-trivial: it is the identity of the
        restricted semigroup even though the accumulation condition is vacuous
        for the singleton cone.
        """
        return self.plain_cone(t) is not None

    def plain_cone(self, t) -> PlainConeData | None:
        t = tuple(t)
        if t in self._plain_cache:
            return self._plain_cache[t]
        result: PlainConeData | None
        if t == self.semigroup.identity:
            origin = tuple(QF(0, 0, self.D) for _ in range(self.n))
            result = PlainConeData((), origin, self.discreteness_radius(t))
        else:
            dec = self.decomposition(t)
            if not dec.V_basis:
                result = None
            else:
                ineqs = []
                for i, s in enumerate(t):
                    if s == 0:
                        continue
                    a = self.face_data.normals[i]
                    row = tuple(
                        QF(s, 0, self.D) * qv_dot(a, vb) for vb in dec.V_basis
                    )
                    ineqs.append(row)
                y = simplex_feasible([], ineqs, len(dec.V_basis), self.D)
                if y is None:
                    result = None
                else:
                    witness = tuple(
                        sum(
                            (dec.V_basis[j][i] * y[j] for j in range(len(y))),
                            QF(0, 0, self.D),
                        )
                        for i in range(self.n)
                    )
                    result = PlainConeData(
                        dec.V_basis, witness, self.discreteness_radius(t)
                    )
        self._plain_cache[t] = result
        return result

    def allowed(self, w, t) -> bool:
        """Whether w pairs with cone type t (w lies in V_t + lattice trace)."""
        pc = self.plain_cone(t)
        if pc is None:
            raise ValidationError("cone type is trivial; no translations allowed")
        return (
            coset_meets_subspace(
                tuple(w),
                self.scheme.gamma_star_module(),
                list(pc.V_basis),
                self.D,
            )
            is not None
        )

    def discreteness_radius(self, t) -> mpq:
        """Certified rational below the shortest discrete-direction lattice vector."""
        t = tuple(t)
        if t == self.semigroup.identity:
            return mpq(1)
        dec = self.decomposition(t)
        if not dec.latticeDV:
            return mpq(1)
        n2 = shortest_vector_norm2(list(dec.latticeDV), self.D)
        return rational_below_sqrt(n2)

    @functools.cached_property
    def global_radius(self) -> mpq:
        """Minimum discreteness radius over every non-trivial cone type."""
        return min(
            self.discreteness_radius(t)
            for t in self.semigroup.cones
            if self.nontrivial(t)
        )

    def nontrivial_cones(self) -> list[tuple[int, ...]]:
        return [t for t in self.semigroup.cones if self.nontrivial(t)]
