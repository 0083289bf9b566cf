"""The translation-limit semigroup of a scheme-and-window system, as data.

Elements are pairs (torus point, cone type); the product adds torus parts and
composes cone types.  The module also hosts the finite neighborhood predicate
that stands in for the convergence class, and the lattice searches used to
realize limit elements concretely.
"""

from __future__ import annotations

import functools
import math

from gmpy2 import mpq

from .arrangement import FaceSemigroup, cone_type_str
from .cps import (
    FaceData,
    Scheme,
    Window,
    enumerate_constrained,
    reversed_faces,
)
from .errors import (
    InvariantViolationError,
    StabilizationError,
    ValidationError,
)
from .qfield import (
    QF,
    QFMatrix,
    format_qf,
    qv_add,
    qv_dot,
    qv_neg,
    qv_norm2,
    qv_scale,
    qv_sub,
)
from .subgroup import ConeGeometry
from .zmodule import rational_below_sqrt


class EllisSystem:
    """Shared context: scheme, window, hyperplane family, cones, closures."""

    def __init__(self, scheme: Scheme, window: Window, shift=None):
        self.scheme = scheme
        self.window = window
        self.D = scheme.D
        self.n = scheme.n
        self.d = scheme.d
        self.shift = tuple(shift) if shift is not None else tuple(
            QF(0, 0, self.D) for _ in range(scheme.n)
        )
        self.face_data: FaceData = reversed_faces(window)
        self.semigroup = FaceSemigroup(self.face_data.normals, self.D)
        self.geometry = ConeGeometry(scheme, self.face_data, self.semigroup)

    @classmethod
    def from_preset(cls, name: str) -> "EllisSystem":
        from .presets import load_preset

        return cls(*load_preset(name))

    # -- torus ------------------------------------------------------------------

    def torus(self, ambient) -> "TorusPoint":
        coords = self.scheme.Tinv.matvec(tuple(ambient))
        frac = tuple(x - x.floor() for x in coords)
        return TorusPoint(self, frac, self.scheme.T.matvec(frac))

    def torus_zero(self) -> "TorusPoint":
        zero = tuple(QF(0, 0, self.D) for _ in range(self.n + self.d))
        return self.torus(zero)

    def torus_from_parts(self, w, s) -> "TorusPoint":
        return self.torus(tuple(w) + tuple(s))

    # -- elements ----------------------------------------------------------------

    def element(self, z: "TorusPoint", t) -> "HullEllisElement":
        return HullEllisElement(self, z, tuple(t))

    def identity_element(self) -> "HullEllisElement":
        return self.element(self.torus_zero(), self.semigroup.identity)

    def translation_element(self, s) -> "HullEllisElement":
        """The pure physical translation moving every pattern by -s."""
        zero_w = tuple(QF(0, 0, self.D) for _ in range(self.n))
        return self.element(
            self.torus_from_parts(zero_w, tuple(s)), self.semigroup.identity
        )

    def lattice_translation(self, m) -> "HullEllisElement":
        return self.translation_element(self.scheme.phys(m))

    def is_member(self, z: "TorusPoint", t) -> bool:
        """Membership of (z, t): the internal part must be allowed for t."""
        return self.geometry.allowed(z.w_part(), tuple(t))

    def idempotents_over_zero(self) -> list["HullEllisElement"]:
        z0 = self.torus_zero()
        return [self.element(z0, t) for t in self.geometry.nontrivial_cones()]

    def minimal_ideal_types(self) -> list[tuple[int, ...]]:
        return self.semigroup.minimal_ideal(restrict=self.geometry.nontrivial_cones())

    def structure_summary(self) -> list[dict]:
        """Components of the element space, grouped by the span of the plain cone."""
        groups: dict[tuple, dict] = {}
        for t in self.geometry.nontrivial_cones():
            pc = self.geometry.plain_cone(t)
            key = tuple(sorted(pc.V_basis))
            g = groups.setdefault(
                key,
                {"dim": len(pc.V_basis), "V_basis": pc.V_basis, "cone_types": []},
            )
            g["cone_types"].append(cone_type_str(t))
        out = sorted(groups.values(), key=lambda g: (-g["dim"], g["cone_types"]))
        for g in out:
            if g["dim"] == self.n:
                g["component"] = "full torus"
            elif g["dim"] == 0:
                g["component"] = "physical translations"
            else:
                g["component"] = "hyperplane cylinder"
        return out

    # -- lattice searches ----------------------------------------------------------

    @functools.cached_property
    def shrinking_multiplier(self) -> tuple[QF, list[list[int]]] | None:
        """A unit 0 < u < 1 with u * (lattice star image) inside itself.

        Returned together with the integer matrix acting on lattice
        coordinates; drives fast geometric shrinking towards cone vertices.
        """
        module = self.scheme.gamma_star_module()
        for y in range(1, 200):
            for eps in (1, -1):
                x2 = self.D * y * y + eps
                x = math.isqrt(x2)
                if x * x != x2:
                    continue
                u = QF(x, -y, self.D)
                if eps == -1:
                    u = u * u
                if not (QF(0, 0, self.D) < u < QF(1, 0, self.D)):
                    continue
                cols = []
                ok = True
                for g in self.scheme.generators:
                    wit = module.membership(qv_scale(u, g.star))
                    if wit is None:
                        ok = False
                        break
                    cols.append(wit)
                if ok:
                    mat = [
                        [cols[j][i] for j in range(self.scheme.r)]
                        for i in range(self.scheme.r)
                    ]
                    return u, mat
        return None

    @functools.lru_cache(maxsize=None)
    def _cone_lattice_point(self, t) -> tuple[int, ...]:
        """Some m != 0 with star(m) inside the plain cone of t (t != identity)."""
        pc = self.geometry.plain_cone(t)
        if pc is None:
            raise ValidationError("trivial cone type has no interior lattice points")
        found = self._search_plain_cone_point(t, None, None)
        if found is None:
            raise StabilizationError(
                f"no lattice point found in cone {cone_type_str(t)}"
            )
        return found

    def _search_plain_cone_point(self, t, w, delta):
        """Bounded search for m with star(m) in the plain-cone head at w.

        With w None the head is anchored at the origin with unit radius and
        the origin itself is excluded.
        """
        D = self.D
        zero = QF(0, 0, D)
        pc = self.geometry.plain_cone(t)
        anchor = tuple(w) if w is not None else tuple(zero for _ in range(self.n))
        rad = delta if delta is not None else QF(1, 0, D)
        star_rows = self.scheme.star_rows()
        rows = []
        if pc.V_basis:
            ann = QFMatrix(list(pc.V_basis), D).kernel_basis()
        else:
            ann = list(QFMatrix.identity(self.n, D).rows)
        ann_rows_m = []
        for a in ann:
            coef = tuple(
                sum((a[i] * star_rows[i][j] for i in range(self.n)), zero)
                for j in range(self.scheme.r)
            )
            rhs = qv_dot(a, anchor)
            ann_rows_m.append((a, coef, rhs))
            rows.append((coef, rhs))
            rows.append((qv_neg(coef), -rhs))
        for i, s in enumerate(t):
            if s == 0:
                continue
            a = self.face_data.normals[i]
            coef = tuple(
                QF(s, 0, D)
                * sum((a[i2] * star_rows[i2][j] for i2 in range(self.n)), zero)
                for j in range(self.scheme.r)
            )
            rhs = QF(s, 0, D) * qv_dot(a, anchor)
            rows.append((coef, rhs))
        r2 = rad * rad
        phys_bound = 2
        while phys_bound <= 4096:
            lims = [(anchor[i] - rad, anchor[i] + rad) for i in range(self.n)]
            lims += [
                (QF(-phys_bound, 0, D), QF(phys_bound, 0, D)) for _ in range(self.d)
            ]
            best = None
            for m in enumerate_constrained(self.scheme, rows, lims):
                sm = self.scheme.star(m)
                rel = qv_sub(sm, anchor)
                if all(x.sign() == 0 for x in rel):
                    continue
                if any(qv_dot(a, rel).sign() != 0 for a, _, _ in ann_rows_m):
                    continue
                ok = True
                for i, s in enumerate(t):
                    if s != 0 and qv_dot(self.face_data.normals[i], rel).sign() != s:
                        ok = False
                        break
                if not ok:
                    continue
                if (qv_norm2(rel) - r2).sign() >= 0:
                    continue
                key = (qv_norm2(self.scheme.phys(m)), m)
                if best is None or key < best[0]:
                    best = (key, m)
            if best is not None:
                return tuple(best[1])
            phys_bound *= 2
        return None

    def lattice_point_in_cone_head(self, w, t, delta: mpq) -> tuple[int, ...]:
        """m with star(m) in the plain-cone head of radius delta anchored at w.

        Existence is guaranteed for allowed w by density along the plain cone.
        With a shrinking unit available the anchor offset is reduced like a
        radix expansion against a geometrically scaled basis of the trace
        group, then a scaled interior cone point is added; otherwise a capped
        box search runs and failures surface as StabilizationError.
        """
        t = tuple(t)
        module = self.scheme.gamma_star_module()
        dqf = QF(delta, 0, self.D)
        if t == self.semigroup.identity:
            wit = module.membership(tuple(w))
            if wit is None:
                raise ValidationError("translation not allowed for the identity type")
            return tuple(wit)
        if self.shrinking_multiplier is not None:
            return self._cone_head_by_reduction(tuple(w), t, dqf)
        found = self._search_plain_cone_point(t, tuple(w), dqf)
        if found is None:
            raise StabilizationError(
                f"no lattice point in the {cone_type_str(t)} head of radius {delta}"
            )
        return found

    def _cone_head_by_reduction(self, w, t, dqf: QF) -> tuple[int, ...]:
        from .zmodule import _int_sqrt_upper, coset_meets_subspace

        D = self.D
        uqf, umat = self.shrinking_multiplier
        pc = self.geometry.plain_cone(t)
        coset = coset_meets_subspace(
            w, self.scheme.gamma_star_module(), list(pc.V_basis), D
        )
        if coset is None:
            raise ValidationError("translation not allowed for this cone type")
        # interior lattice point of the plain cone and its clearance from the
        # strict walls, as exact rational bounds
        m_h = list(self._cone_lattice_point(t))
        x_h = self.scheme.star(m_h)
        margin = None
        for i, s in enumerate(t):
            if s == 0:
                continue
            a = self.face_data.normals[i]
            val = qv_dot(a, x_h) * QF(s, 0, D)
            bound = QF(rational_below_sqrt((val * val) / qv_norm2(a)), 0, D)
            margin = bound if margin is None or bound < margin else margin
        h_len = QF(_int_sqrt_upper(qv_norm2(x_h)), 0, D)
        # scale the cone point until it fits the head with room for the residue
        scale = QF(1, 0, D)
        steps = 0
        while scale * (h_len + margin) >= dqf:
            scale = scale * uqf
            steps += 1
            if steps > 4096:
                raise StabilizationError("head radius too small to reach")
        for _ in range(steps):
            m_h = [
                sum(umat[i][j] * m_h[j] for j in range(self.scheme.r))
                for i in range(self.scheme.r)
            ]
        eps = scale * margin * QF("1/2", 0, D)
        # radix-reduce the anchor offset against the scaled trace basis
        m_acc = list(coset)
        rho = qv_sub(self.scheme.star(m_acc), w)
        basis_m = self._trace_basis_m(t)
        basis_star = [self.scheme.star(mb) for mb in basis_m]
        eps2 = eps * eps
        for _ in range(256):
            if (qv_norm2(rho) - eps2).sign() < 0 or not basis_m:
                break
            mat = QFMatrix(list(basis_star), D).transpose()
            coords = mat.solve(rho)
            digits = [(c + QF("1/2", 0, D)).floor() for c in coords]
            for i, n in enumerate(digits):
                if n:
                    rho = qv_sub(rho, qv_scale(QF(n, 0, D), basis_star[i]))
                    m_acc = [a - n * b for a, b in zip(m_acc, basis_m[i])]
            basis_star = [qv_scale(uqf, b) for b in basis_star]
            basis_m = [
                [
                    sum(umat[i][j] * mb[j] for j in range(self.scheme.r))
                    for i in range(self.scheme.r)
                ]
                for mb in basis_m
            ]
        else:
            raise StabilizationError("anchor reduction did not converge")
        result = tuple(a + b for a, b in zip(m_acc, m_h))
        rel = qv_sub(self.scheme.star(result), w)
        if (qv_norm2(rel) - dqf * dqf).sign() >= 0:
            raise InvariantViolationError("reduced point left the head ball")
        for i, s in enumerate(t):
            if s and qv_dot(self.face_data.normals[i], rel).sign() != s:
                raise InvariantViolationError("reduced point left the cone")
        return result

    @functools.lru_cache(maxsize=None)
    def _trace_basis_m(self, t) -> tuple[tuple[int, ...], ...]:
        """Independent lattice coordinates whose stars span the dense direction."""
        pc = self.geometry.plain_cone(t)
        if not pc.V_basis:
            return ()
        ms = self.geometry.trace_lattice_m(list(pc.V_basis))
        chosen: list[tuple[int, ...]] = []
        stars: list[tuple[QF, ...]] = []
        for m in ms:
            cand = stars + [self.scheme.star(m)]
            if QFMatrix(cand, self.D).rank() == len(cand):
                chosen.append(tuple(m))
                stars.append(self.scheme.star(m))
            if len(chosen) == len(pc.V_basis):
                break
        if len(chosen) != len(pc.V_basis):
            raise InvariantViolationError("trace lattice does not span the dense direction")
        return tuple(chosen)

    # -- convergence predicate -----------------------------------------------------

    def in_basic_neighborhood(
        self, candidate: "InternalEllisElement", target: "InternalEllisElement", eps: mpq
    ) -> bool:
        """Whether a small plain-cone head at the candidate fits inside the
        target's eps-head; the single-step form of the convergence class."""
        return self._neighborhood_delta(candidate, target, eps) is not None

    def certified_delta(
        self, candidate: "InternalEllisElement", target: "InternalEllisElement", eps: mpq
    ) -> mpq | None:
        """A rational head radius witnessing in_basic_neighborhood, or None."""
        return self._neighborhood_delta(candidate, target, eps)

    def _neighborhood_delta(self, candidate, target, eps: mpq):
        if eps <= 0:
            return None
        D = self.D
        w_t, t = target.w, target.t
        w_c, tc = candidate.w, candidate.t
        pc_t = self.geometry.plain_cone(t)
        pc_c = self.geometry.plain_cone(tc)
        diff = qv_sub(w_c, w_t)
        # candidate directions must lie in the target's dense span
        if pc_c.V_basis:
            if not pc_t.V_basis:
                return None
            vmat = QFMatrix(list(pc_t.V_basis), D).transpose()
            try:
                for v in pc_c.V_basis:
                    vmat.solve(v)
            except Exception:
                return None
        # base point offset must lie in the target's dense span
        if pc_t.V_basis:
            try:
                QFMatrix(list(pc_t.V_basis), D).transpose().solve(diff)
            except Exception:
                return None
        elif any(x.sign() != 0 for x in diff):
            return None
        n2 = qv_norm2(diff)
        epsq = QF(eps, 0, D)
        if (n2 - epsq * epsq).sign() >= 0:
            return None
        caps = [(epsq * epsq - n2) / (epsq + epsq)]
        for i, s in enumerate(t):
            if s == 0:
                continue
            a = self.face_data.normals[i]
            val = qv_dot(a, diff)
            sv = val.sign()
            if sv == s:
                q2 = (val * val) / qv_norm2(a)
                caps.append(QF(rational_below_sqrt(q2), 0, D))
            elif sv == 0:
                if tc[i] != s:
                    return None
            else:
                return None
        delta = None
        for c in caps:
            q = rational_below(c)
            if delta is None or q < delta:
                delta = q
        return delta


def rational_below(x: QF) -> mpq:
    """A positive rational strictly below the positive value x."""
    if x.sign() <= 0:
        raise ValidationError("need a positive value")
    bits = 20
    while bits <= 4096:
        k = (x * (1 << bits)).floor()
        if k >= 1:
            q = mpq(k, 1 << bits)
            if QF(q, 0, x.D) < x:
                return q
            return mpq(k - 1, 1 << bits) if k > 1 else mpq(1, 1 << (bits + 1))
        bits *= 2
    raise ValidationError("value too small to bound rationally")


class TorusPoint:
    """Canonical point of the quotient torus, stored via [0,1) lattice coordinates."""

    __slots__ = ("system", "coords", "ambient")

    def __init__(self, system: EllisSystem, coords, ambient):
        self.system = system
        self.coords = tuple(coords)
        self.ambient = tuple(ambient)

    def w_part(self) -> tuple[QF, ...]:
        return self.ambient[: self.system.n]

    def s_part(self) -> tuple[QF, ...]:
        return self.ambient[self.system.n :]

    def add(self, other: "TorusPoint") -> "TorusPoint":
        return self.system.torus(qv_add(self.ambient, other.ambient))

    def neg(self) -> "TorusPoint":
        return self.system.torus(qv_neg(self.ambient))

    def is_zero(self) -> bool:
        return all(x.sign() == 0 for x in self.coords)

    def __eq__(self, other):
        return isinstance(other, TorusPoint) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __str__(self):
        w = ",".join(format_qf(x) for x in self.w_part())
        s = ",".join(format_qf(x) for x in self.s_part())
        return f"[{w};{s}]_Σ"


class InternalEllisElement:
    """Element (w, t) of the internal-system semigroup: raw internal vector."""

    __slots__ = ("system", "w", "t")

    def __init__(self, system: EllisSystem, w, t):
        self.system = system
        self.w = tuple(w)
        self.t = tuple(t)
        if not system.geometry.allowed(self.w, self.t):
            raise ValidationError(
                f"{cone_type_str(self.t)} does not allow this internal translation"
            )

    def compose(self, other: "InternalEllisElement") -> "InternalEllisElement":
        t = self.system.semigroup.product(self.t, other.t)
        try:
            return InternalEllisElement(self.system, qv_add(self.w, other.w), t)
        except ValidationError as exc:
            raise InvariantViolationError("internal composition left the semigroup") from exc

    def __eq__(self, other):
        return (
            isinstance(other, InternalEllisElement)
            and self.w == other.w
            and self.t == other.t
        )

    def __hash__(self):
        return hash((self.w, self.t))

    def __str__(self):
        return f"w=({','.join(format_qf(x) for x in self.w)})  t={cone_type_str(self.t)}"


class HullEllisElement:
    """Element (z, t) of the hull semigroup: torus point plus cone type."""

    __slots__ = ("system", "z", "t")

    def __init__(self, system: EllisSystem, z: TorusPoint, t):
        self.system = system
        self.z = z
        self.t = tuple(t)
        if not system.is_member(z, self.t):
            raise ValidationError(
                f"torus point {z} is not compatible with type {cone_type_str(self.t)}"
            )

    def compose(self, other: "HullEllisElement") -> "HullEllisElement":
        """The transformation applying `other` first and then self.

        Torus parts add; cone types compose left-dominantly, so the later
        transformation's strict signs win, matching the action formula.
        """
        t = self.system.semigroup.product(self.t, other.t)
        z = self.z.add(other.z)
        try:
            return HullEllisElement(self.system, z, t)
        except ValidationError as exc:
            raise InvariantViolationError("composition left the semigroup") from exc

    def pistar(self) -> TorusPoint:
        return self.z

    def is_idempotent(self) -> bool:
        return self.compose(self) == self

    def is_invertible(self) -> bool:
        """Only pure physical translations are invertible."""
        if self.t != self.system.semigroup.identity:
            return False
        module = self.system.scheme.gamma_star_module()
        return module.membership(self.z.w_part()) is not None

    def range_leq(self, other: "HullEllisElement") -> bool:
        return self.system.semigroup.leq(self.t, other.t)

    def internal(self) -> InternalEllisElement:
        return InternalEllisElement(self.system, self.z.w_part(), self.t)

    def __eq__(self, other):
        return (
            isinstance(other, HullEllisElement)
            and self.z == other.z
            and self.t == other.t
        )

    def __hash__(self):
        return hash((self.z, self.t))

    def __str__(self):
        return f"z={self.z}  t={cone_type_str(self.t)}"
