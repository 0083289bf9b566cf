"""Integer-lattice algorithms: Hermite normal form, kernels, membership, cosets.

All questions of the form "is this vector an integer combination of these
generators" or "does this coset meet that subspace" are answered here, after
splitting Q(sqrt(D))-linear conditions into their rational components.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

from .errors import NoSolutionError
from .qfield import QF, QFMatrix

# Integer matrices are plain lists of lists of python ints, column-count fixed.


def _copy(m):
    return [list(r) for r in m]


def hnf(M: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Column Hermite normal form: returns (H, U) with H = M U, U unimodular.

    H has its column pivots on a strictly descending staircase, positive
    pivots, entries left of a pivot in its row reduced into [0, pivot), and
    zero columns trailing.  Deterministic.
    """
    H = _copy(M)
    nrows = len(H)
    ncols = len(H[0]) if nrows else 0
    U = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def swap(a, b):
        if a == b:
            return
        for row in H:
            row[a], row[b] = row[b], row[a]
        for row in U:
            row[a], row[b] = row[b], row[a]

    def addmul(dst, src, q):
        if q == 0:
            return
        for row in H:
            row[dst] -= q * row[src]
        for row in U:
            row[dst] -= q * row[src]

    def negate(c):
        for row in H:
            row[c] = -row[c]
        for row in U:
            row[c] = -row[c]

    c = 0
    for i in range(nrows):
        if c == ncols:
            break
        while True:
            nz = [j for j in range(c, ncols) if H[i][j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: (abs(H[i][j]), j))
            swap(c, jmin)
            others = [j for j in range(c + 1, ncols) if H[i][j] != 0]
            if not others:
                break
            for j in others:
                addmul(j, c, H[i][j] // H[i][c])
        if H[i][c] == 0:
            continue
        if H[i][c] < 0:
            negate(c)
        for j in range(c):
            addmul(j, c, H[i][j] // H[i][c])
        c += 1
    return H, U


def hnf_pivots(H: list[list[int]]) -> list[tuple[int, int]]:
    """(row, col) of each pivot of a column-HNF matrix."""
    pivots = []
    nrows = len(H)
    for j in range(len(H[0]) if nrows else 0):
        r = next((i for i in range(nrows) if H[i][j] != 0), None)
        if r is None:
            break
        pivots.append((r, j))
    return pivots


def int_kernel(M: list[list[int]]) -> list[list[int]]:
    """Basis (columns) of {n integer : M n = 0}; the basis is saturated."""
    H, U = hnf(M)
    ncols = len(H[0]) if H else 0
    rank = len(hnf_pivots(H))
    return [[U[i][j] for i in range(ncols)] for j in range(rank, ncols)]


def solve_integer(M: list[list[int]], rhs: list[int]) -> list[int] | None:
    """One integer solution of M x = rhs, or None."""
    H, U = hnf(M)
    ncols = len(H[0]) if H else 0
    resid = list(rhs)
    y = [0] * ncols
    for r, j in hnf_pivots(H):
        piv = H[r][j]
        if resid[r] % piv != 0:
            return None
        q = resid[r] // piv
        y[j] = q
        if q:
            for i in range(len(resid)):
                resid[i] -= q * H[i][j]
    if any(resid):
        return None
    return [sum(U[i][j] * y[j] for j in range(ncols)) for i in range(ncols)]


def clear_denominators(rows: list[list[mpq]], rhs: list[mpq] | None = None):
    """Scale each row (and its rhs entry) to integers; solution sets unchanged."""
    out_rows: list[list[int]] = []
    out_rhs: list[int] = []
    for i, row in enumerate(rows):
        dens = [x.denominator for x in row]
        if rhs is not None:
            dens.append(rhs[i].denominator)
        m = 1
        for d in dens:
            m = m * d // math.gcd(m, d)
        out_rows.append([int(x * m) for x in row])
        if rhs is not None:
            out_rhs.append(int(rhs[i] * m))
    return (out_rows, out_rhs) if rhs is not None else out_rows


def split_to_rational(
    rows: list[tuple[QF, ...]], rhs: list[QF] | None = None
) -> tuple[list[list[mpq]], list[mpq] | None]:
    """Split an F-linear system (over rational/integer unknowns) in two.

    Each equation sum_j (a_j + b_j sqrt(D)) x_j = r becomes the rational pair
    sum a_j x_j = r_a and sum b_j x_j = r_b; purely rational rows pass through
    as a single row paired with a zero row that is dropped.
    """
    out_rows: list[list[mpq]] = []
    out_rhs: list[mpq] = []
    for i, row in enumerate(rows):
        ra = [x.a for x in row]
        rb = [x.b for x in row]
        ta = rhs[i].a if rhs is not None else mpq(0)
        tb = rhs[i].b if rhs is not None else mpq(0)
        out_rows.append(ra)
        out_rhs.append(ta)
        if any(x != 0 for x in rb) or tb != 0:
            out_rows.append(rb)
            out_rhs.append(tb)
    return (out_rows, out_rhs if rhs is not None else None)


class ZModule:
    """Finitely generated subgroup of F^k, given by generator columns.

    Generators may be redundant; membership is decided exactly by splitting
    into rational coordinates and integer linear algebra.
    """

    __slots__ = ("generators", "ambient_dim", "D", "_int_rows")

    def __init__(self, generators: list[tuple[QF, ...]], ambient_dim: int, D: int):
        self.generators = [tuple(g) for g in generators]
        self.ambient_dim = ambient_dim
        self.D = D
        for g in self.generators:
            if len(g) != ambient_dim:
                raise NoSolutionError("generator dimension mismatch")
        # columns of the split rational matrix, rows = 2*ambient coordinates
        rows: list[list[mpq]] = []
        for i in range(ambient_dim):
            rows.append([g[i].a for g in self.generators])
        for i in range(ambient_dim):
            rows.append([g[i].b for g in self.generators])
        self._int_rows = rows

    def membership(self, v: tuple[QF, ...]) -> list[int] | None:
        """Witness coefficients n with sum n_i g_i = v, or None."""
        rhs = [v[i].a for i in range(self.ambient_dim)]
        rhs += [v[i].b for i in range(self.ambient_dim)]
        rows, rhs_i = clear_denominators([list(r) for r in self._int_rows], rhs)
        return solve_integer(rows, rhs_i)

    def __contains__(self, v) -> bool:
        return self.membership(tuple(v)) is not None


def coset_meets_subspace(
    v: tuple[QF, ...],
    module: ZModule,
    subspace_basis: list[tuple[QF, ...]],
    D: int,
) -> list[int] | None:
    """Witness m with v - sum m_i g_i in span(subspace_basis), or None.

    Reduction: with B a basis of the annihilator of the subspace, solve
    B (v - G m) = 0 over the integers via rational splitting.
    """
    n = module.ambient_dim
    if subspace_basis:
        ann = QFMatrix(subspace_basis, D).kernel_basis()
    else:
        ann = list(QFMatrix.identity(n, D).rows)
    if not ann:
        return [0] * len(module.generators)
    rows = []
    rhs = []
    for y in ann:
        rows.append(tuple(sum((g[i] * y[i] for i in range(n)), QF(0, 0, D)) for g in module.generators))
        rhs.append(sum((v[i] * y[i] for i in range(n)), QF(0, 0, D)))
    srows, srhs = split_to_rational(rows, rhs)
    irows, irhs = clear_denominators(srows, srhs)
    if not module.generators:
        return [] if not any(irhs) else None
    return solve_integer(irows, irhs)


def discrete_group_basis(
    vectors: list[tuple[QF, ...]], D: int
) -> list[tuple[QF, ...]]:
    """Z-basis of the subgroup of R^q generated by the given F-vectors.

    The group must be discrete (guaranteed by the callers' closure
    decomposition); the basis is extracted by completing the integer relation
    kernel to a basis of Z^k.
    """
    vecs = [v for v in vectors]
    k = len(vecs)
    if k == 0:
        return []
    q = len(vecs[0])
    rel_rows: list[tuple[QF, ...]] = [
        tuple(v[i] for v in vecs) for i in range(q)
    ]
    srows, _ = split_to_rational(rel_rows, None)
    irows = clear_denominators(srows)
    kern = int_kernel(irows)  # columns: relations among the generators
    if not kern:
        return vecs
    s = len(kern)
    bk = [[kern[j][i] for j in range(s)] for i in range(k)]  # k x s
    bkT = [[bk[i][j] for i in range(k)] for j in range(s)]  # s x k
    _, Uprime = hnf(bkT)
    # W = Uprime^T is unimodular with W @ bk = [T; 0], T invertible
    W = [[Uprime[j][i] for j in range(k)] for i in range(k)]
    Winv = _unimodular_inverse(W)
    zero = QF(0, 0, D)
    basis = []
    for j in range(s, k):
        col = tuple(
            sum((vecs[t][i] * Winv[t][j] for t in range(k)), zero) for i in range(q)
        )
        basis.append(col)
    return basis


def _unimodular_inverse(W: list[list[int]]) -> list[list[int]]:
    k = len(W)
    D = 2  # any valid discriminant; entries stay rational throughout
    m = QFMatrix([[QF(x, 0, D) for x in row] for row in W], D)
    inv = m.inverse()
    out = []
    for row in inv.rows:
        irow = []
        for x in row:
            if x.b != 0 or x.a.denominator != 1:
                raise NoSolutionError("matrix was not unimodular")
            irow.append(int(x.a))
        out.append(irow)
    return out


def shortest_vector_norm2(basis: list[tuple[QF, ...]], D: int) -> QF:
    """Exact squared length of the shortest nonzero lattice vector.

    Brute force over the integer box derived from the Gram matrix: any vector
    no longer than the shortest basis vector has i-th coefficient bounded by
    |b_i^*| * min_j |b_j|, with b^* the dual basis.
    """
    m = len(basis)
    if m == 0:
        raise NoSolutionError("empty basis has no shortest vector")
    from .qfield import qv_dot

    gram = QFMatrix([[qv_dot(bi, bj) for bj in basis] for bi in basis], D)
    ginv = gram.inverse()
    min_diag = min((gram.rows[i][i] for i in range(m)))
    bounds = []
    for i in range(m):
        b2 = ginv.rows[i][i] * min_diag
        bounds.append(_int_sqrt_upper(b2))
    best: QF | None = None
    coeffs = [0] * m

    def rec(i: int):
        nonlocal best
        if i == m:
            if all(c == 0 for c in coeffs):
                return
            vec = tuple(
                sum((basis[t][j] * coeffs[t] for t in range(m)), QF(0, 0, D))
                for j in range(len(basis[0]))
            )
            n2 = qv_dot(vec, vec)
            if best is None or n2 < best:
                best = n2
            return
        lo = 0 if all(c == 0 for c in coeffs[:i]) else -bounds[i]
        for c in range(lo, bounds[i] + 1):
            coeffs[i] = c
            rec(i + 1)
        coeffs[i] = 0

    rec(0)
    assert best is not None and best.sign() > 0
    return best


def _int_sqrt_upper(y: QF) -> int:
    """Smallest integer B with B*B >= y (y >= 0)."""
    if y.sign() <= 0:
        return 0
    b = max(1, math.isqrt(y.floor()) if y.floor() > 0 else 1)
    while QF(b * b, 0, y.D) < y:
        b += 1
    return b


def rational_below_sqrt(y: QF) -> mpq:
    """A positive rational q with q*q < y, for y > 0; exact arithmetic only."""
    if y.sign() <= 0:
        raise NoSolutionError("need a positive value")
    bits = 20
    while True:
        scaled = (y * (1 << (2 * bits))).floor()
        k = math.isqrt(scaled) if scaled > 0 else 0
        while k > 0 and QF(k * k, 0, y.D) >= y * (1 << (2 * bits)):
            k -= 1
        if k > 0:
            return mpq(k, 1 << bits)
        bits *= 2
        if bits > 2048:
            raise NoSolutionError("value too small to bound")
