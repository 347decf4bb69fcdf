"""Combinatorics of the exponent matrix A.

Everything here is exact: functionals and weights are Fractions, facet and
face enumeration is brute force over small point subsets (intended scale is
n <= 4, N <= 8), and triangulations pull at deterministically chosen
vertices so repeated runs agree.

Conventions: the polytope is the convex hull of the origin and the columns
w_1..w_N of A; the cone is generated by the columns.  For w in the cone the
weight d(w) is the smallest a > 0 with w in a*polytope, computed as
max(0, max_F l_F(w)) over the facet functionals l_F that are identically 1
on the facets avoiding the origin.  d is homogeneous and subadditive and
takes values in (1/denom) Z on lattice points.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import gcd, lcm

from . import finitefield as ff
from .errors import BudgetExceeded, RankDeficient


# ----------------------------------------------------------------------
# exact linear algebra on small matrices
# ----------------------------------------------------------------------

def mat_rank(rows) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == nrows:
            break
    return r


def kernel_line(rows, n: int):
    """Primitive integer vector spanning the kernel of the given row vectors
    in R^n, or None unless the kernel is exactly one-dimensional."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = {}
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots[col] = r
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    fc = free[0]
    v = [Fraction(0)] * n
    v[fc] = Fraction(1)
    for col, row in pivots.items():
        v[col] = -m[row][fc]
    den = lcm(*[x.denominator for x in v]) if v else 1
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(ints)


def solve_integer(columns, target):
    """One integer solution k of sum k_j columns[j] = target, or None.

    Column-style Hermite reduction with a transformation record; detects
    membership of target in the integer column span.
    """
    n = len(target)
    N = len(columns)
    A = [[columns[j][i] for j in range(N)] for i in range(n)]  # n x N
    U = [[1 if i == j else 0 for j in range(N)] for i in range(N)]  # N x N

    def col_op_add(dst, src, f):
        for i in range(n):
            A[i][dst] += f * A[i][src]
        for i in range(N):
            U[i][dst] += f * U[i][src]

    def col_swap(a, b):
        for i in range(n):
            A[i][a], A[i][b] = A[i][b], A[i][a]
        for i in range(N):
            U[i][a], U[i][b] = U[i][b], U[i][a]

    row = 0
    pivot_cols = []
    for col in range(N):
        if row >= n:
            break
        while True:
            nz = [j for j in range(col, N) if A[row][j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(A[row][j]))
            if jmin != col:
                col_swap(col, jmin)
            done = True
            for j in range(col + 1, N):
                if A[row][j] != 0:
                    col_op_add(j, col, -(A[row][j] // A[row][col]))
                    if A[row][j] != 0:
                        done = False
            if done:
                break
        if A[row][col] != 0:
            pivot_cols.append((row, col))
            row += 1
        elif any(A[r2][col] != 0 for r2 in range(row, n)):
            continue
    # back-substitute target against the triangular-ish column system
    k = [0] * N
    t = list(target)
    for r, c in pivot_cols:
        if t[r] % A[r][c] != 0:
            return None
        f = t[r] // A[r][c]
        k[c] = f
        for i in range(n):
            t[i] -= f * A[i][c]
    if any(x != 0 for x in t):
        return None
    # pull back through the recorded column operations
    out = [sum(U[i][j] * k[j] for j in range(N)) for i in range(N)]
    return out


# ----------------------------------------------------------------------
# configuration and Newton data
# ----------------------------------------------------------------------

class ExponentConfig:
    """Integer n x N matrix of full row rank; columns are the exponents."""

    def __init__(self, A):
        rows = [tuple(int(x) for x in row) for row in A]
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix must be rectangular and nonempty")
        self.A = tuple(rows)
        self.n = len(rows)
        self.N = len(rows[0])
        self.columns = [tuple(rows[i][j] for i in range(self.n)) for j in range(self.N)]
        if mat_rank(rows) != self.n:
            raise RankDeficient(f"matrix has rank < n = {self.n}")

    def __repr__(self):
        return f"ExponentConfig({[list(r) for r in self.A]})"


class _OutsideCone:
    __slots__ = ()

    def __repr__(self):
        return "OutsideCone"


OUTSIDE_CONE = _OutsideCone()


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _primitive(vec):
    g = 0
    for x in vec:
        g = gcd(g, abs(x))
    return tuple(x // g for x in vec) if g else tuple(vec)


class NewtonData:
    """Facet functionals of the polytope, inequalities of the cone, the
    weight denominator, plus the raw facet list used for face enumeration."""

    def __init__(self, config: ExponentConfig):
        self.config = config
        n = config.n
        pts = [tuple([0] * n)] + config.columns
        distinct = sorted(set(pts))
        self.points = pts  # index 0 is the origin, then columns in order

        facets = {}  # primitive (nu, c) -> True; supporting with <=
        for S in itertools.combinations(distinct, n):
            diffs = [tuple(a - b for a, b in zip(p, S[0])) for p in S[1:]]
            if n > 1 and mat_rank(diffs) != n - 1:
                continue
            nu = kernel_line(diffs, n) if n > 1 else (1,)
            if nu is None:
                continue
            c = _dot(nu, S[0])
            vals = [_dot(nu, p) for p in distinct]
            if all(v <= c for v in vals):
                pass
            elif all(v >= c for v in vals):
                nu, c = tuple(-x for x in nu), -c
            else:
                continue
            # tight set must span the hyperplane for a genuine facet
            tight = [p for p in distinct if _dot(nu, p) == c]
            base = tight[0]
            tdiffs = [tuple(a - b for a, b in zip(p, base)) for p in tight[1:]]
            if n > 1 and mat_rank(tdiffs) != n - 1:
                continue
            facets[(nu, c)] = True
        self.facets = sorted(facets)  # [(nu, c)]; origin lies on facet iff c == 0

        # all points of the hull satisfy <nu, x> <= c and the origin gives 0 <= c
        self.functionals = [
            tuple(Fraction(x, c) for x in nu) for nu, c in self.facets if c != 0
        ]
        if not self.functionals:
            raise RankDeficient("no facet avoids the origin; degenerate hull")

        den = 1
        for l in self.functionals:
            for x in l:
                den = lcm(den, x.denominator)
        self.denom = den

        cone = {}
        gens = [w for w in set(config.columns) if any(w)]
        for S in itertools.combinations(gens, n - 1):
            if n == 1:
                nu = (1,)
            else:
                if mat_rank(S) != n - 1:
                    continue
                nu = kernel_line(S, n)
                if nu is None:
                    continue
            vals = [_dot(nu, w) for w in gens]
            if all(v >= 0 for v in vals):
                cone[nu] = True
            elif all(v <= 0 for v in vals):
                cone[tuple(-x for x in nu)] = True
        self.cone_facets = sorted(cone)

    # -- membership and weight -------------------------------------------

    def in_cone(self, w) -> bool:
        return all(_dot(nu, w) >= 0 for nu in self.cone_facets)

    def weight(self, w):
        """d(w) for w in the cone; OUTSIDE_CONE otherwise."""
        if not self.in_cone(w):
            return OUTSIDE_CONE
        best = Fraction(0)
        for l in self.functionals:
            v = _dot(l, w)
            if v > best:
                best = v
        return best

    def faces_off_origin(self):
        """Proper faces of the hull avoiding the origin, as sorted tuples of
        column indices (0-based j with w_j on the face).  Every proper face is
        an intersection of facets; subsets of the facet list enumerate them."""
        if len(self.facets) > 20:
            raise BudgetExceeded("too many facets for exhaustive face search")
        pts = self.points
        seen = {}
        for r in range(1, len(self.facets) + 1):
            for sub in itertools.combinations(self.facets, r):
                tight = [
                    k
                    for k, p in enumerate(pts)
                    if all(_dot(nu, p) == c for nu, c in sub)
                ]
                if not tight or 0 in tight:
                    continue  # empty, or the face contains the origin
                cols = tuple(sorted(k - 1 for k in tight))
                seen[cols] = True
        return sorted(seen)


def newton_data(config: ExponentConfig) -> NewtonData:
    return NewtonData(config)


def weight(nd: NewtonData, w):
    return nd.weight(w)


# ----------------------------------------------------------------------
# lattice point enumeration
# ----------------------------------------------------------------------

class LatticePointSet:
    """Integer points with w + offset in the cone and d(w + offset) <= cap,
    sorted by (weight, lex).  The default offset 0 enumerates the cone's own
    lattice points; a twist offset gamma enumerates the natural index set of
    the gamma-shifted monomial space (it coincides with the unshifted set
    whenever every coordinate reach of gamma is below 1)."""

    def __init__(self, nd: NewtonData, cap, offset=None):
        self.cap = Fraction(cap)
        if self.cap < 0:
            raise ValueError("cap must be >= 0")
        n = nd.config.n
        self.offset = (
            tuple(Fraction(x) for x in offset)
            if offset is not None
            else tuple([Fraction(0)] * n)
        )
        pts = nd.points
        lo = [
            min(self.cap * min(p[i] for p in pts), 0) - self.offset[i]
            for i in range(n)
        ]
        hi = [
            max(self.cap * max(p[i] for p in pts), 0) - self.offset[i]
            for i in range(n)
        ]
        found = []
        ranges = [range(int(lo[i]) - 2, int(hi[i]) + 3) for i in range(n)]
        for w in itertools.product(*ranges):
            shifted = tuple(a + b for a, b in zip(w, self.offset))
            d = nd.weight(shifted)
            if d is not OUTSIDE_CONE and d <= self.cap:
                found.append((d, w))
        found.sort()
        self.points = [w for _, w in found]
        self.weights = [d for d, _ in found]
        self.index = {w: k for k, w in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def enumerate_points(nd: NewtonData, cap, offset=None) -> LatticePointSet:
    return LatticePointSet(nd, cap, offset)


# ----------------------------------------------------------------------
# monoid membership
# ----------------------------------------------------------------------

class InCA:
    def __init__(self, witness):
        self.witness = tuple(witness)

    def __repr__(self):
        return f"InCA(witness={list(self.witness)})"


class NotInCA:
    def __repr__(self):
        return "NotInCA"


class Unknown:
    def __repr__(self):
        return "Unknown"


def monoid_membership(config: ExponentConfig, w, K_max: int = 50, node_budget: int = 200000):
    """Is w a nonnegative integer combination of the columns?

    Bounded breadth-first search over partial sums, at most K_max terms.  For
    a pointed cone a positive functional turns the verdict into a proof either
    way; otherwise an exhausted search reports Unknown.
    """
    w = tuple(int(x) for x in w)
    nd = newton_data(config)
    if not nd.in_cone(w):
        return NotInCA()
    if solve_integer(config.columns, w) is None:
        return NotInCA()  # not even in the integer column span
    if all(x == 0 for x in w):
        return InCA([0] * config.N)

    # pointedness certificate: the sum of cone facet functionals is positive
    # on every nonzero generator iff the cone is pointed
    h = None
    if nd.cone_facets:
        cand = tuple(sum(col) for col in zip(*nd.cone_facets))
        vals = [_dot(cand, wj) for wj in config.columns if any(wj)]
        if all(v > 0 for v in vals):
            h = cand
            hmin = min(vals)
            K_proof = _dot(h, w) // hmin
    pointed = h is not None

    cap = min(K_max, K_proof) if pointed else K_max
    origin = tuple([0] * config.n)
    parent = {origin: None}
    frontier = [origin]
    for _ in range(cap):
        nxt = []
        for x in frontier:
            for j, wj in enumerate(config.columns):
                y = tuple(a + b for a, b in zip(x, wj))
                if y in parent:
                    continue
                if pointed and _dot(h, y) > _dot(h, w):
                    continue
                if len(parent) >= node_budget:
                    return Unknown()
                parent[y] = (x, j)
                if y == w:
                    k = [0] * config.N
                    cur = y
                    while parent[cur] is not None:
                        prev, j0 = parent[cur]
                        k[j0] += 1
                        cur = prev
                    return InCA(k)
                nxt.append(y)
        frontier = nxt
        if not frontier:
            break
    if pointed and cap == K_proof:
        return NotInCA()
    return Unknown()


# ----------------------------------------------------------------------
# triangulation, volume, simplicial decomposition
# ----------------------------------------------------------------------

def _affine_coordinates(points):
    """Exact coordinates of the points inside their affine hull: returns
    (dim, coords) with coords[i] a tuple of Fractions of length dim."""
    base = points[0]
    diffs = [tuple(a - b for a, b in zip(p, base)) for p in points[1:]]
    # pick a maximal independent subset of diffs as a basis
    basis = []
    for d in diffs:
        if mat_rank(basis + [d]) > len(basis):
            basis.append(d)
    k = len(basis)
    if k == 0:
        return 0, [tuple()] * len(points)
    # coordinates solve basis^T c = diff in least-exact sense: use elimination
    coords = []
    for p in points:
        d = tuple(a - b for a, b in zip(p, base))
        sol = _solve_in_span(basis, d)
        coords.append(tuple(sol))
    return k, coords


def _solve_in_span(basis, target):
    """Coefficients expressing target in the given independent basis vectors."""
    k = len(basis)
    n = len(target)
    m = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    r = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(r, n) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(n):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    sol = [Fraction(0)] * k
    for i, col in enumerate(pivots):
        sol[col] = m[i][k]
    return sol


def _triangulate(points):
    """Triangulate the convex hull of the given points, pulling at the
    lex-smallest point of each recursion level.  Returns simplices as tuples
    of point values; points interior to the hull are simply not used."""
    uniq = sorted(set(points))
    if len(uniq) < 2:
        return []
    return _triangulate_fulldim(uniq)


def _triangulate_fulldim(points):
    """points: distinct, spanning their affine hull."""
    base = points[0]
    dim, coords = _affine_coordinates(points)
    if dim == 0:
        return []
    if dim == 1:
        order = sorted(range(len(points)), key=lambda i: coords[i][0])
        return [
            (points[order[i]], points[order[i + 1]])
            for i in range(len(order) - 1)
        ]
    # work in exact affine-hull coordinates
    cpts = coords
    v0_idx = min(range(len(points)), key=lambda i: points[i])
    v0c = cpts[v0_idx]
    simplices = []
    # facets of the dim-polytope conv(cpts): brute force over dim-subsets
    facets = {}
    idxs = range(len(cpts))
    for S in itertools.combinations(idxs, dim):
        diffs = [tuple(a - b for a, b in zip(cpts[i], cpts[S[0]])) for i in S[1:]]
        if dim > 1 and mat_rank(diffs) != dim - 1:
            continue
        nu = kernel_line(diffs, dim) if dim > 1 else (1,)
        if nu is None:
            continue
        c = _dot(nu, cpts[S[0]])
        vals = [_dot(nu, q) for q in cpts]
        if all(v <= c for v in vals):
            pass
        elif all(v >= c for v in vals):
            nu, c = tuple(-x for x in nu), -c
        else:
            continue
        tight = tuple(sorted(i for i in idxs if _dot(nu, cpts[i]) == c))
        tdiffs = [
            tuple(a - b for a, b in zip(cpts[i], cpts[tight[0]])) for i in tight[1:]
        ]
        if dim > 1 and mat_rank(tdiffs) != dim - 1:
            continue
        facets[tight] = True
    for tight in sorted(facets):
        if v0_idx in tight:
            continue
        sub_points = [points[i] for i in tight]
        if dim - 1 == 0:
            simplices.append((points[v0_idx], sub_points[0]))
        else:
            for s in _triangulate_fulldim(sub_points):
                simplices.append((points[v0_idx],) + s)
    return simplices


def _det_int(rows):
    """Exact determinant of a small integer matrix (fraction-free enough)."""
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for i in range(col + 1, n):
            if m[i][col] != 0:
                f = m[i][col] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    assert det.denominator == 1
    return int(det)


class Simplex:
    """A full simplex {0, w_{i_1}, ..., w_{i_n}} of the decomposition with its
    fundamental-cell lattice points and cone generators."""

    def __init__(self, config, vertices):
        self.vertices = [tuple(int(x) for x in v) for v in vertices]  # excludes 0
        n = config.n
        W = [[self.vertices[j][i] for j in range(n)] for i in range(n)]  # columns
        self.det = abs(_det_int(W))
        self.generators = list(self.vertices)
        self.cell_points = self._cell_points(W, n)

    def _cell_points(self, W, n):
        # integer points of { sum c_i w_i : 0 <= c_i < 1 }
        corners = []
        for eps in itertools.product((0, 1), repeat=n):
            corners.append(
                tuple(sum(eps[j] * W[i][j] for j in range(n)) for i in range(n))
            )
        lo = [min(c[i] for c in corners) for i in range(n)]
        hi = [max(c[i] for c in corners) for i in range(n)]
        out = []
        for x in itertools.product(*[range(lo[i], hi[i] + 1) for i in range(n)]):
            c = _solve_in_span(
                [tuple(W[i][j] for i in range(n)) for j in range(n)], x
            )
            if all(0 <= ci < 1 for ci in c):
                out.append(tuple(x))
        out.sort()
        return out

    def cone_coordinates(self, w):
        """Exact coordinates of w in the simplicial cone, or None if outside."""
        c = _solve_in_span(self.vertices, w)
        # the basis solve ignores residuals; confirm w really is the combination
        n = len(self.vertices)
        recon = tuple(
            sum(c[j] * self.vertices[j][i] for j in range(n)) for i in range(n)
        )
        if tuple(Fraction(x) for x in w) != recon:
            return None
        if all(ci >= 0 for ci in c):
            return c
        return None


class SimplicialDecomposition:
    def __init__(self, config: ExponentConfig):
        nd = newton_data(config)
        n = config.n
        simplices = []
        for nu, c in nd.facets:
            if c == 0:
                continue  # cones over facets through the origin are flat
            face_pts = sorted(
                set(w for w in config.columns if _dot(nu, w) == c)
            )
            if n == 1:
                simplices.append(Simplex(config, [face_pts[0]]))
                continue
            for s in _triangulate(face_pts):
                simplices.append(Simplex(config, list(s)))
        self.config = config
        self.newton = nd
        self.simplices = simplices

    def cover_check(self, w) -> bool:
        return any(s.cone_coordinates(w) is not None for s in self.simplices)


def simplicial_decomposition(config: ExponentConfig) -> SimplicialDecomposition:
    return SimplicialDecomposition(config)


def normalized_volume(config: ExponentConfig) -> int:
    """n! vol of the hull: sum of |det| over the pulling triangulation coned
    at the origin (facets through the origin contribute nothing)."""
    return sum(s.det for s in SimplicialDecomposition(config).simplices)


# ----------------------------------------------------------------------
# nondegeneracy
# ----------------------------------------------------------------------

class NondegenerateUpTo:
    def __init__(self, s_max):
        self.s_max = s_max

    def __repr__(self):
        return f"NondegenerateUpTo({self.s_max})"


class DegenerateWitness:
    def __init__(self, point, face):
        self.point = point
        self.face = face

    def __repr__(self):
        return f"DegenerateWitness(point={self.point}, face={self.face})"


def nondegeneracy_check(config: ExponentConfig, a_coeffs, s_max: int = 2):
    """Bounded certificate: for every proper face avoiding the origin check
    that the face-restricted toric derivatives t_i dF/dt_i have no common zero
    on the torus over F_{q^s}, s <= s_max.  A verdict NondegenerateUpTo(s_max)
    is not a proof over the algebraic closure.

    a_coeffs: list of N coefficients in a common FqParams field.
    """
    if len(a_coeffs) != config.N:
        raise ValueError("need one coefficient per column")
    base = a_coeffs[0].params
    nd = newton_data(config)
    faces = nd.faces_off_origin()
    for s in range(1, s_max + 1):
        big = ff.FqParams(base.p, base.degree * s)
        a_emb = [ff.embed(a, big) for a in a_coeffs]
        units = ff.enumerate_units(big)
        for face in faces:
            live = [j for j in face if not a_emb[j].is_zero()]
            if not live:
                # the face polynomial vanishes identically
                point = tuple(big.one() for _ in range(config.n))
                return DegenerateWitness(point, face)
            for point in itertools.product(units, repeat=config.n):
                degenerate = True
                for i in range(config.n):
                    acc = big.zero()
                    for j in live:
                        term = a_emb[j] * big.from_int(config.A[i][j])
                        for t_idx in range(config.n):
                            e = config.A[t_idx][j]
                            if e:
                                term = term * point[t_idx] ** e
                        acc = acc + term
                    if not acc.is_zero():
                        degenerate = False
                        break
                if degenerate:
                    return DegenerateWitness(point, face)
    return NondegenerateUpTo(s_max)
