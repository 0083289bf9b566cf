"""Cut & project schemes, windows, the star map, and model-set point patterns.

A scheme carries r = n + d generator pairs (physical, internal); their graph
spans the lattice used for projection.  Windows are compact convex polytopes
in internal space, available from explicit vertices, half-spaces, or as the
canonical zonotope of the internal generators.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass

from .errors import (
    DegenerateWindowError,
    SingularMatrixError,
    ValidationError,
)
from .qfield import (
    QF,
    QFMatrix,
    format_qf,
    parse_qf,
    qv,
    qv_add,
    qv_dot,
    qv_neg,
    qv_norm2,
    qv_scale,
    qv_sub,
)
from .zmodule import ZModule, clear_denominators, int_kernel, split_to_rational


@dataclass(frozen=True)
class Face:
    """Affine hyperplane {x : normal.x = offset} bounding a polytope.

    `side` is the sign of normal.x - offset on the interior; the normal is
    normalized to have first nonzero coordinate +1.
    """

    normal: tuple[QF, ...]
    offset: QF
    side: int


def _normalize_face(normal, offset, side, D):
    lead = next((x for x in normal if x.sign() != 0), None)
    if lead is None:
        raise ValidationError("zero face normal")
    inv = lead.inverse()
    flip = -1 if lead.sign() < 0 else 1
    return Face(
        tuple(x * inv for x in normal), offset * inv, side * flip
    )


def _normalize_linear(normal):
    lead = next(x for x in normal if x.sign() != 0)
    inv = lead.inverse()
    return tuple(x * inv for x in normal)


class Window:
    """Compact convex full-dimensional polytope in internal space (n <= 2)."""

    def __init__(self, vertices, faces, D: int):
        self.vertices = tuple(tuple(v) for v in vertices)
        self.faces = tuple(faces)
        self.D = D
        self.n = len(self.vertices[0])
        self._cross_validate()

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_vertices(cls, vertices, D: int) -> "Window":
        vertices = [tuple(v) for v in vertices]
        n = len(vertices[0])
        if n == 1:
            if len(vertices) != 2:
                raise ValidationError("an interval window needs exactly 2 vertices")
            lo, hi = vertices[0][0], vertices[1][0]
            if not lo < hi:
                raise ValidationError("interval endpoints must be increasing")
            faces = [
                _normalize_face((QF(1, 0, D),), lo, +1, D),
                _normalize_face((QF(1, 0, D),), hi, -1, D),
            ]
            return cls(vertices, faces, D)
        if n != 2:
            raise ValidationError("windows are implemented for n <= 2")
        if len(vertices) < 3:
            raise ValidationError("a polygon window needs at least 3 vertices")
        m = len(vertices)
        for i in range(m):
            a, b, c = vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]
            cr = _cross2(qv_sub(b, a), qv_sub(c, b))
            if cr.sign() <= 0:
                raise ValidationError(
                    "vertices must be strictly convex and counterclockwise"
                )
        faces = []
        for i in range(m):
            a, b = vertices[i], vertices[(i + 1) % m]
            e = qv_sub(b, a)
            normal = (e[1], -e[0])  # outward for a ccw polygon
            faces.append(_normalize_face(normal, qv_dot(normal, a), -1, D))
        return cls(vertices, faces, D)

    @classmethod
    def from_halfspaces(cls, faces, D: int) -> "Window":
        faces = [
            _normalize_face(tuple(f.normal), f.offset, f.side, D) for f in faces
        ]
        n = len(faces[0].normal)
        if n == 1:
            los = [f.offset for f in faces if f.side > 0]
            his = [f.offset for f in faces if f.side < 0]
            if len(los) != 1 or len(his) != 1:
                raise ValidationError("an interval needs one face per side")
            return cls.from_vertices([(los[0],), (his[0],)], D)
        if n != 2:
            raise ValidationError("windows are implemented for n <= 2")
        # outward normals, sorted counterclockwise; consecutive faces meet in a
        # vertex of the polygon
        out = []
        for f in faces:
            a = f.normal if f.side < 0 else qv_neg(f.normal)
            c = f.offset if f.side < 0 else -f.offset
            out.append((a, c))
        out.sort(key=functools.cmp_to_key(lambda p, q: _angle_cmp(p[0], q[0])))
        verts = []
        m = len(out)
        for i in range(m):
            (a1, c1), (a2, c2) = out[i], out[(i + 1) % m]
            mat = QFMatrix([a1, a2], D)
            try:
                v = mat.solve((c1, c2))
            except Exception as exc:
                raise ValidationError("half-spaces do not bound a polygon") from exc
            verts.append(v)
        # rotate so the walk starts after the last face, giving ccw vertex order
        verts = verts[-1:] + verts[:-1]
        win = cls.from_vertices(verts, D)
        if set(win.faces) != {
            _normalize_face(a, c, -1, D) for a, c in out
        }:
            raise ValidationError("redundant or inconsistent half-spaces")
        return win

    @classmethod
    def canonical(cls, scheme: "Scheme") -> "Window":
        """Zonotope sum of the segments [0, e_i*] in internal space."""
        D = scheme.D
        gens = [g.star for g in scheme.generators]
        if scheme.n == 1:
            lo = sum((g[0] for g in gens if g[0].sign() < 0), QF(0, 0, D))
            hi = sum((g[0] for g in gens if g[0].sign() > 0), QF(0, 0, D))
            if not lo < hi:
                raise DegenerateWindowError("degenerate window")
            return cls.from_vertices([(lo,), (hi,)], D)
        if scheme.n != 2:
            raise ValidationError("canonical windows are implemented for n <= 2")
        if any(all(x.sign() == 0 for x in g) for g in gens):
            raise DegenerateWindowError("degenerate window: a zero internal generator")
        segments = [g for g in gens] + [qv_neg(g) for g in gens]
        # merge equal directions, then walk edges sorted by angle
        merged: list[tuple[QF, ...]] = []
        for s in sorted(segments, key=functools.cmp_to_key(_angle_cmp)):
            if merged and _angle_cmp(merged[-1], s) == 0:
                merged[-1] = qv_add(merged[-1], s)
            else:
                merged.append(s)
        if len(merged) < 4:
            raise DegenerateWindowError("degenerate window: all generators parallel")
        start = functools.reduce(
            qv_add,
            (g for g in gens if _lower_half(g)),
            (QF(0, 0, D), QF(0, 0, D)),
        )
        verts = [start]
        for e in merged[:-1]:
            verts.append(qv_add(verts[-1], e))
        lex_min = min(range(len(verts)), key=lambda i: verts[i])
        verts = verts[lex_min:] + verts[:lex_min]
        return cls.from_vertices(verts, D)

    # -- geometry -------------------------------------------------------------

    def _cross_validate(self):
        c = self.centroid()
        for f in self.faces:
            if (qv_dot(f.normal, c) - f.offset).sign() != f.side:
                raise ValidationError("window centroid is not interior to every face")
        for v in self.vertices:
            on = 0
            for f in self.faces:
                s = (qv_dot(f.normal, v) - f.offset).sign()
                if s == 0:
                    on += 1
                elif s != f.side:
                    raise ValidationError("vertex outside a window face")
            expected = 1 if self.n == 1 else 2
            if on != expected:
                raise ValidationError("vertex/halfspace representations disagree")

    def centroid(self) -> tuple[QF, ...]:
        total = functools.reduce(qv_add, self.vertices)
        return qv_scale(QF(1, 0, self.D) / len(self.vertices), total)

    def contains(self, x, boundary: str = "closed") -> bool:
        strict = boundary == "open"
        for f in self.faces:
            s = (qv_dot(f.normal, x) - f.offset).sign()
            if s == -f.side or (strict and s == 0):
                return False
        return True

    def bounding_box(self) -> list[tuple[QF, QF]]:
        return [
            (min(v[i] for v in self.vertices), max(v[i] for v in self.vertices))
            for i in range(self.n)
        ]

    def __eq__(self, other):
        return (
            isinstance(other, Window)
            and self.vertices == other.vertices
            and self.faces == other.faces
        )

    def __hash__(self):
        return hash((self.vertices, self.faces))


def _cross2(u, v) -> QF:
    return u[0] * v[1] - u[1] * v[0]


def _lower_half(v) -> bool:
    sy = v[1].sign()
    return sy < 0 or (sy == 0 and v[0].sign() < 0)


def _angle_cmp(u, v) -> int:
    """Counterclockwise order on nonzero plane vectors, starting at angle 0."""
    hu = 1 if _lower_half(u) else 0
    hv = 1 if _lower_half(v) else 0
    if hu != hv:
        return hu - hv
    return -_cross2(u, v).sign()


@dataclass(frozen=True)
class Generator:
    phys: tuple[QF, ...]
    star: tuple[QF, ...]


class Scheme:
    """A real cut & project scheme with exact F-coordinates.

    The r = n + d combined generator matrix must be nonsingular (the graph is
    a lattice) and the physical projection must be injective on integer
    combinations.
    """

    def __init__(self, d: int, n: int, D: int, generators):
        self.d = d
        self.n = n
        self.D = D
        self.generators = tuple(
            Generator(tuple(p), tuple(s)) for p, s in generators
        )
        self.r = len(self.generators)
        if self.r != n + d:
            raise ValidationError(
                f"need r = n + d = {n + d} generators, got {self.r}"
            )
        for g in self.generators:
            if len(g.phys) != d or len(g.star) != n:
                raise ValidationError("generator dimension mismatch")
            for x in g.phys + g.star:
                if x.b != 0 and x.D != D:
                    raise ValidationError("generator coordinates with foreign discriminant")
        # rows of T are the combined coordinates (star first) per generator
        self.T = QFMatrix(
            [list(g.star) + list(g.phys) for g in self.generators], D
        ).transpose()
        try:
            self.Tinv = self.T.inverse()
        except SingularMatrixError:
            raise ValidationError("generators do not span a lattice") from None
        phys_rows = [
            tuple(g.phys[i] for g in self.generators) for i in range(d)
        ]
        srows, _ = split_to_rational(phys_rows, None)
        if int_kernel(clear_denominators(srows)):
            raise ValidationError("physical projection is not injective on the lattice")

    def star(self, m) -> tuple[QF, ...]:
        acc = tuple(QF(0, 0, self.D) for _ in range(self.n))
        for mi, g in zip(m, self.generators, strict=True):
            if mi:
                acc = qv_add(acc, qv_scale(QF(mi, 0, self.D), g.star))
        return acc

    def phys(self, m) -> tuple[QF, ...]:
        acc = tuple(QF(0, 0, self.D) for _ in range(self.d))
        for mi, g in zip(m, self.generators, strict=True):
            if mi:
                acc = qv_add(acc, qv_scale(QF(mi, 0, self.D), g.phys))
        return acc

    def embed(self, m) -> tuple[QF, ...]:
        return self.star(m) + self.phys(m)

    def star_rows(self) -> list[tuple[QF, ...]]:
        return [tuple(g.star[i] for g in self.generators) for i in range(self.n)]

    def phys_rows(self) -> list[tuple[QF, ...]]:
        return [tuple(g.phys[i] for g in self.generators) for i in range(self.d)]

    @functools.cache
    def gamma_star_module(self) -> ZModule:
        return ZModule([g.star for g in self.generators], self.n, self.D)

    def __eq__(self, other):
        return (
            isinstance(other, Scheme)
            and (self.d, self.n, self.D) == (other.d, other.n, other.D)
            and self.generators == other.generators
        )

    def __hash__(self):
        return hash((self.d, self.n, self.D, self.generators))


@dataclass(frozen=True)
class Hyperplane:
    """A linear hyperplane of the family H_W, with its parallel faces of M."""

    normal: tuple[QF, ...]
    face_indices: tuple[int, ...]


class FaceData:
    """Faces of the reversed window M = -W and the linear hyperplane family.

    Hyperplanes are normalized (first nonzero normal coordinate +1) and sorted
    lexicographically by normal; the order is fixed for all cone types.
    """

    def __init__(self, window: Window):
        self.D = window.D
        self.n = window.n
        self.faces = tuple(
            _normalize_face(f.normal, -f.offset, -f.side, self.D)
            for f in window.faces
        )
        groups: dict[tuple[QF, ...], list[int]] = {}
        for i, f in enumerate(self.faces):
            groups.setdefault(_normalize_linear(f.normal), []).append(i)
        self.hyperplanes = tuple(
            Hyperplane(a, tuple(groups[a])) for a in sorted(groups)
        )
        self.hyperplane_of_face = {}
        for h_idx, h in enumerate(self.hyperplanes):
            for fi in h.face_indices:
                self.hyperplane_of_face[fi] = h_idx

    @property
    def normals(self) -> list[tuple[QF, ...]]:
        return [h.normal for h in self.hyperplanes]

    def __len__(self):
        return len(self.hyperplanes)


def reversed_faces(window: Window) -> FaceData:
    return FaceData(window)


class PointPattern:
    """A finite set of projected lattice points, sorted by integer coordinates.

    Each entry is (m, pos); generate_pattern keeps pos equal to the physical
    projection of m, while hull selectors may carry a constant physical shift.
    """

    def __init__(self, points):
        pts = sorted(points, key=lambda p: p[0])
        for (m1, _), (m2, _) in zip(pts, pts[1:]):
            if m1 == m2:
                raise ValidationError("duplicate lattice point in pattern")
        self.points = tuple((tuple(m), tuple(p)) for m, p in pts)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, PointPattern) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def positions(self) -> frozenset:
        return frozenset(p for _, p in self.points)

    def translate(self, scheme: Scheme, m_shift) -> "PointPattern":
        shift = scheme.phys(m_shift)
        return PointPattern(
            [
                (tuple(a + b for a, b in zip(m, m_shift)), qv_add(p, shift))
                for m, p in self.points
            ]
        )

    def restrict(self, center, radius: QF) -> "PointPattern":
        r2 = radius * radius
        return PointPattern(
            [
                (m, p)
                for m, p in self.points
                if (qv_norm2(qv_sub(p, center)) - r2).sign() <= 0
            ]
        )

    def to_csv(self, r: int, d: int) -> str:
        header = ",".join(
            [f"m{i + 1}" for i in range(r)] + [f"x{i + 1}" for i in range(d)]
        )
        lines = [header]
        for m, p in self.points:
            lines.append(
                ",".join([str(x) for x in m] + [format_qf(x) for x in p])
            )
        return "\n".join(lines) + "\n"


class RegionEnumerator:
    """Exact enumeration of lattice coordinates hitting a window x ball region.

    The product region (window bounding data x ball bounding box) is pulled
    back through the inverse generator matrix for global integer bounds; the
    closed face and box inequalities then prune coordinate prefixes during the
    recursive scan.  Consumers apply their own exact per-point filter.
    """

    def __init__(self, scheme: Scheme, window: Window):
        self.scheme = scheme
        self.window = window
        self.D = scheme.D
        star_rows = scheme.star_rows()
        phys_rows = scheme.phys_rows()
        # closed window faces as rows over m: side*(a . S m) >= side*(c + a.w)
        self.face_rows = []
        for f in window.faces:
            coef = tuple(
                sum(
                    (f.normal[i] * star_rows[i][j] for i in range(scheme.n)),
                    QF(0, 0, self.D),
                )
                for j in range(scheme.r)
            )
            self.face_rows.append((f, coef))
        self.phys_rows_m = phys_rows

    def candidates(self, w, center, radius: QF):
        """All m with S m in the closed shifted window and P m in the ball box."""
        scheme = self.scheme
        wbox = [
            (lo + w[i], hi + w[i])
            for i, (lo, hi) in enumerate(self.window.bounding_box())
        ]
        bbox = [(center[i] - radius, center[i] + radius) for i in range(scheme.d)]
        rows = []
        for f, coef in self.face_rows:
            side = QF(f.side, 0, self.D)
            rhs = f.side * (f.offset + qv_dot(f.normal, w))
            rows.append((tuple(side * c for c in coef), rhs))
        for i in range(scheme.d):
            coef = self.phys_rows_m[i]
            rows.append((coef, bbox[i][0]))
            rows.append((qv_neg(coef), -bbox[i][1]))
        yield from enumerate_constrained(scheme, rows, wbox + bbox)


def enumerate_constrained(scheme: Scheme, rows, lims):
    """Integer coordinate vectors satisfying every row constraint coef.m >= rhs.

    `lims` bounds the embedded image (internal coordinates first, physical
    after); pulled back through the inverse generator matrix it gives exact
    global integer bounds, which the rows then tighten prefix by prefix.
    """
    D = scheme.D
    r = scheme.r
    bounds = []
    for j in range(r):
        lo = QF(0, 0, D)
        hi = QF(0, 0, D)
        for i in range(r):
            c = scheme.Tinv.rows[j][i]
            s = c.sign()
            if s > 0:
                lo, hi = lo + c * lims[i][0], hi + c * lims[i][1]
            elif s < 0:
                lo, hi = lo + c * lims[i][1], hi + c * lims[i][0]
        bounds.append((lo.floor(), -(-hi).floor()))
    if any(lo > hi for lo, hi in bounds):
        return
    # per-row maxima of the not-yet-fixed tail, from the global bounds
    suffix = []
    for coef, _ in rows:
        sfx = [QF(0, 0, D)] * (r + 1)
        acc = QF(0, 0, D)
        for j in range(r - 1, -1, -1):
            c = coef[j]
            s = c.sign()
            if s > 0:
                acc = acc + c * bounds[j][1]
            elif s < 0:
                acc = acc + c * bounds[j][0]
            sfx[j] = acc
        suffix.append(sfx)

    m = [0] * r

    def rec(j: int, partials):
        if j == r:
            yield tuple(m)
            return
        lo, hi = bounds[j]
        for idx, (coef, rhs) in enumerate(rows):
            c = coef[j]
            s = c.sign()
            if s == 0:
                continue
            tail_best = suffix[idx][j] - _signed(c, bounds[j])
            bound = (rhs - partials[idx] - tail_best) / c
            if s > 0:
                b = -(-bound).floor()
                if b > lo:
                    lo = b
            else:
                b = bound.floor()
                if b < hi:
                    hi = b
            if lo > hi:
                return
        for v in range(lo, hi + 1):
            m[j] = v
            if v:
                nxt = [p + coef[j] * v for p, (coef, _) in zip(partials, rows)]
            else:
                nxt = partials
            yield from rec(j + 1, nxt)
        m[j] = 0

    zero = QF(0, 0, D)
    yield from rec(0, [zero] * len(rows))


def _signed(c: QF, bound):
    return c * bound[1] if c.sign() > 0 else c * bound[0]


_ENUM_CACHE: dict[tuple[Scheme, Window], RegionEnumerator] = {}


def region_enumerator(scheme: Scheme, window: Window) -> RegionEnumerator:
    key = (scheme, window)
    if key not in _ENUM_CACHE:
        _ENUM_CACHE[key] = RegionEnumerator(scheme, window)
    return _ENUM_CACHE[key]


def generate_pattern(
    scheme: Scheme,
    window: Window,
    w,
    center,
    radius: QF,
    boundary: str = "closed",
) -> PointPattern:
    """All lattice points with star image in w + W and physical part in B(center, radius)."""
    enum = region_enumerator(scheme, window)
    r2 = radius * radius
    pts = []
    for m in enum.candidates(w, center, radius):
        sm = scheme.star(m)
        if not window.contains(qv_sub(sm, w), boundary):
            continue
        pm = scheme.phys(m)
        if (qv_norm2(qv_sub(pm, center)) - r2).sign() > 0:
            continue
        pts.append((m, pm))
    return PointPattern(pts)


def stabilizer(scheme: Scheme, normal) -> list[list[int]]:
    """Integer generators of the subgroup whose star image lies on the hyperplane."""
    row = tuple(
        sum(
            (normal[i] * scheme.star_rows()[i][j] for i in range(scheme.n)),
            QF(0, 0, scheme.D),
        )
        for j in range(scheme.r)
    )
    srows, _ = split_to_rational([row], None)
    return int_kernel(clear_denominators(srows))


def validate_almost_canonical(scheme: Scheme, window: Window) -> dict:
    """Check the sufficient density condition face by face.

    Density is tested on the star image of each stabilizer inside its linear
    hyperplane (the group itself lives in physical space); PASS means the
    sufficient condition holds, INCONCLUSIVE that it fails and the underlying
    assumptions stay undecided.
    """
    from .subgroup import FGSubgroup, is_dense

    fd = reversed_faces(window)
    report = {"hyperplanes": [], "status": "PASS"}
    gamma_dense = is_dense(
        FGSubgroup.full_space(
            [g.star for g in scheme.generators], scheme.n, scheme.D
        )
    )
    report["gamma_star_dense"] = gamma_dense
    for h in fd.hyperplanes:
        if scheme.n == 1:
            basis = []
        else:
            basis = QFMatrix([h.normal], scheme.D).kernel_basis()
        gens = [scheme.star(mv) for mv in stabilizer(scheme, h.normal)]
        sub = FGSubgroup(tuple(basis), tuple(gens), scheme.n, scheme.D)
        dense = is_dense(sub)
        report["hyperplanes"].append(
            {"normal": tuple(h.normal), "stabilizer_star_dense": dense}
        )
        if not dense:
            report["status"] = "INCONCLUSIVE"
    return report


# -- configuration ------------------------------------------------------------


def scheme_from_config(cfg: dict) -> tuple[Scheme, Window, tuple[QF, ...]]:
    try:
        D = int(cfg["D"])
        d = int(cfg["d"])
        n = int(cfg["n"])
        gens = [
            (
                qv([parse_qf(x, D) for x in g["phys"]], D),
                qv([parse_qf(x, D) for x in g["star"]], D),
            )
            for g in cfg["generators"]
        ]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad scheme config: {exc}") from exc
    scheme = Scheme(d, n, D, gens)
    wcfg = cfg.get("window", {"type": "canonical"})
    wtype = wcfg.get("type", "vertices" if "vertices" in wcfg else
                     "halfspaces" if "halfspaces" in wcfg else "canonical")
    if wtype == "canonical":
        window = Window.canonical(scheme)
    elif wtype == "vertices":
        window = Window.from_vertices(
            [[parse_qf(x, D) for x in v] for v in wcfg["vertices"]], D
        )
    elif wtype == "halfspaces":
        faces = [
            Face(
                tuple(parse_qf(x, D) for x in h["a"]),
                parse_qf(h["c"], D),
                +1 if h["s"] == "+" else -1,
            )
            for h in wcfg["halfspaces"]
        ]
        window = Window.from_halfspaces(faces, D)
    else:
        raise ValidationError(f"unknown window type {wtype!r}")
    shift = tuple(parse_qf(x, D) for x in cfg.get("shift", ["0"] * n))
    if len(shift) != n:
        raise ValidationError("shift dimension mismatch")
    return scheme, window, shift


def scheme_to_config(scheme: Scheme, window: Window, shift) -> dict:
    return {
        "D": scheme.D,
        "d": scheme.d,
        "n": scheme.n,
        "generators": [
            {
                "phys": [format_qf(x) for x in g.phys],
                "star": [format_qf(x) for x in g.star],
            }
            for g in scheme.generators
        ],
        "window": {
            "type": "vertices",
            "vertices": [[format_qf(x) for x in v] for v in window.vertices],
        },
        "shift": [format_qf(x) for x in shift],
    }


def load_config(path: str) -> tuple[Scheme, Window, tuple[QF, ...]]:
    with open(path, encoding="utf-8") as fh:
        return scheme_from_config(json.load(fh))
