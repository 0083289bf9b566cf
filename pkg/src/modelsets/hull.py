"""Hull points as (torus point, extended cone type) pairs, realized as patterns.

A hull point carries a sign for every hyperplane through which a singular
translate passes (its cut type) and the off-domain marker for the others.  The
selector turns such a point into the concrete pattern it names; the action of
semigroup elements and its net-limit validation live here too.
"""

from __future__ import annotations

import functools

from gmpy2 import mpq

from .arrangement import simplex_feasible
from .cps import PointPattern, region_enumerator
from .ellis import EllisSystem, HullEllisElement, TorusPoint
from .errors import (
    InvariantViolationError,
    StabilizationError,
    ValidationError,
)
from .qfield import QF, qv_add, qv_dot, qv_scale, qv_sub
from .zmodule import ZModule

INFTY = None  # off-domain marker in extended cone types

_EXT_CHAR = {-1: "-", 1: "+", INFTY: "∞"}


def extended_type_str(c) -> str:
    return "".join(_EXT_CHAR[v] for v in c)


@functools.lru_cache(maxsize=None)
def _face_offset_module(system: EllisSystem, face_index: int) -> ZModule:
    """The rank-one value group {a_f . gamma*} for one face of M."""
    f = system.face_data.faces[face_index]
    gens = [
        (qv_dot(f.normal, g.star),) for g in system.scheme.generators
    ]
    return ZModule(gens, 1, system.D)


def cut_type(system: EllisSystem, w) -> tuple[int, ...]:
    """Indices of hyperplanes with a singular translate through w."""
    hit = []
    for h_idx, h in enumerate(system.face_data.hyperplanes):
        for fi in h.face_indices:
            f = system.face_data.faces[fi]
            val = qv_dot(f.normal, w) - f.offset
            if _face_offset_module(system, fi).membership((val,)) is not None:
                hit.append(h_idx)
                break
    return tuple(hit)


class HullPoint:
    """A point of the hull: torus point plus a chamber of its cut sub-arrangement."""

    __slots__ = ("system", "z", "c")

    def __init__(self, system: EllisSystem, z: TorusPoint, c):
        self.system = system
        self.z = z
        self.c = tuple(c)
        dom = tuple(i for i, v in enumerate(self.c) if v is not INFTY)
        if dom != cut_type(system, z.w_part()):
            raise ValidationError("cone type domain differs from the cut type")
        if dom:
            ineqs = [
                qv_scale(QF(self.c[i], 0, system.D), system.face_data.normals[i])
                for i in dom
            ]
            if simplex_feasible([], ineqs, system.n, system.D) is None:
                raise ValidationError("extended cone type is not a chamber of the cut")

    @property
    def dom(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.c) if v is not INFTY)

    def is_nonsingular(self) -> bool:
        return not self.dom

    def __eq__(self, other):
        return isinstance(other, HullPoint) and self.z == other.z and self.c == other.c

    def __hash__(self):
        return hash((self.z, self.c))

    def __str__(self):
        return f"z={self.z}  c={extended_type_str(self.c)}"


def fiber(system: EllisSystem, z: TorusPoint) -> list[HullPoint]:
    """All hull points over a torus point: chambers of the cut sub-arrangement."""
    dom = cut_type(system, z.w_part())
    k = len(system.face_data.hyperplanes)
    points: list[HullPoint] = []

    def rec(assigned: dict[int, int], idx: int):
        if idx == len(dom):
            c = tuple(assigned.get(i, INFTY) for i in range(k))
            points.append(HullPoint(system, z, c))
            return
        for s in (-1, 1):
            assigned[dom[idx]] = s
            ineqs = [
                qv_scale(QF(assigned[i], 0, system.D), system.face_data.normals[i])
                for i in list(assigned)
            ]
            if simplex_feasible([], ineqs, system.n, system.D) is not None:
                rec(assigned, idx + 1)
            del assigned[dom[idx]]

    rec({}, 0)
    return points


def selector(p: HullPoint, center, radius) -> PointPattern:
    """The pattern named by a hull point, restricted to a physical ball.

    A lattice point enters iff, against every face of the reversed window, the
    shifted internal residue is strictly on the interior side or lies exactly
    on the face with the point's sign agreeing with that side.
    """
    system = p.system
    scheme = system.scheme
    w = p.z.w_part()
    s = p.z.s_part()
    if not isinstance(radius, QF):
        radius = QF(radius, 0, system.D)
    enum = region_enumerator(scheme, system.window)
    shifted_center = qv_add(tuple(center), s)
    r2 = radius * radius
    pts = []
    for m in enum.candidates(w, shifted_center, radius):
        res = qv_sub(w, scheme.star(m))
        keep = True
        for fi, f in enumerate(system.face_data.faces):
            sign = (qv_dot(f.normal, res) - f.offset).sign()
            if sign == f.side:
                continue
            if sign != 0:
                keep = False
                break
            h_idx = system.face_data.hyperplane_of_face[fi]
            if p.c[h_idx] is INFTY:
                raise InvariantViolationError(
                    "singular face hit outside the cut type domain"
                )
            if p.c[h_idx] != f.side:
                keep = False
                break
        if not keep:
            continue
        pos = qv_sub(scheme.phys(m), s)
        d2 = sum(
            ((pos[i] - center[i]) * (pos[i] - center[i]) for i in range(scheme.d)),
            QF(0, 0, system.D),
        )
        if (d2 - r2).sign() <= 0:
            pts.append((m, pos))
    return PointPattern(pts)


def act(p: HullPoint, g: HullEllisElement) -> HullPoint:
    """The semigroup action: add torus parts, overwrite signs where g is strict,
    and restrict to the new cut type."""
    system = p.system
    z2 = p.z.add(g.z)
    new_dom = cut_type(system, z2.w_part())
    c2 = []
    for i in range(len(p.c)):
        if i not in new_dom:
            c2.append(INFTY)
            continue
        v = p.c[i] if g.t[i] == 0 else g.t[i]
        if v is INFTY:
            raise InvariantViolationError(
                "action produced an off-domain sign inside the cut type"
            )
        c2.append(v)
    try:
        return HullPoint(system, z2, tuple(c2))
    except ValidationError as exc:
        raise InvariantViolationError("action left the hull") from exc


def net_limit_oracle(
    p: HullPoint,
    g: HullEllisElement,
    radius,
    schedule=None,
) -> PointPattern:
    """The action recomputed as a stabilized limit of lattice translations.

    For each head radius in the schedule a lattice point approximating g's
    internal part within its plain cone is found; the translated patch of p
    must stabilize over two consecutive radii, and the stabilized patch is
    the defining value of p acted on by g.
    """
    system = p.system
    scheme = system.scheme
    if schedule is None:
        schedule = [mpq(1, 8**k) for k in range(1, 7)]
    if len(schedule) < 2:
        raise ValidationError("schedule needs at least two radii")
    if not isinstance(radius, QF):
        radius = QF(radius, 0, system.D)
    w_g = g.z.w_part()
    s_g = g.z.s_part()
    prev_gamma = None
    prev_positions = None
    for delta in schedule:
        m_gamma = system.lattice_point_in_cone_head(w_g, g.t, mpq(delta))
        if m_gamma == prev_gamma:
            # same approximant as the previous radius: no new information
            continue
        gamma_phys = scheme.phys(m_gamma)
        center = qv_sub(s_g, gamma_phys)
        base = selector(p, center, radius)
        shift = qv_sub(gamma_phys, s_g)
        pts = [
            (tuple(a + b for a, b in zip(m, m_gamma)), qv_add(pos, shift))
            for m, pos in base.points
        ]
        pattern = PointPattern(pts)
        exact_hit = scheme.star(m_gamma) == tuple(w_g)
        if exact_hit:
            # the approximant reached the internal part exactly; the net is
            # eventually constant and the patch is the limit itself
            return pattern
        positions = pattern.positions()
        if prev_positions is not None and positions == prev_positions:
            return pattern
        prev_gamma = m_gamma
        prev_positions = positions
    raise StabilizationError(
        "no stabilization within schedule; extend the radius schedule"
    )
