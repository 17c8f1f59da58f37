"""Brute-force polytope oracle: basic solutions, graphs and property checks."""
from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from .errors import (
    Disconnected,
    Empty,
    RankDeficient,
    SingularMatrix,
    TopNotUnique,
    Unbounded,
    Unreachable,
)
from .exact import (
    Vector,
    ceil_sqrt,
    int_cross,
    int_rank,
    integer_rows,
    dot,
    nullspace,
    norm2_sq,
    primitive,
    rank,
    row_echelon,
    solve_square,
    solve_int,
    sub,
    transpose,
    vec,
)
from .system import Basis, CheckReport, InequalitySystem, SolveOutcome

PARALLEL_THRESHOLD = 2000


@dataclass(frozen=True)
class VertexRecord:
    point: Vector
    tight_rows: frozenset[int]
    defining_bases: tuple[Basis, ...]
    feasible: bool


@dataclass(frozen=True)
class PolytopeGraph:
    system: InequalitySystem
    vertices: tuple[VertexRecord, ...]
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]

    def index_of(self, point: Sequence[Fraction]) -> int:
        p = vec(point)
        for k, v in enumerate(self.vertices):
            if v.point == p:
                return k
        raise KeyError(f"{p} is not a vertex")


@dataclass(frozen=True)
class GeometryStats:
    delta1_sq_max: Fraction
    delta1_ub: Fraction
    delta2_lb: Fraction


# ------------------------------------------------------------------ enumeration

def threads() -> int:
    try:
        return max(1, int(os.environ.get("ROCKFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _solve_subsets(rows, subsets):
    # rows are integer [A_i | b_i]; returns (U, numerators, den)
    d = len(rows[0]) - 1
    out = []
    for U in subsets:
        try:
            nums, den = solve_int([rows[i] for i in U], d)
        except SingularMatrix:
            continue
        out.append((U, tuple(r[0] for r in nums), den))
    return out


def _chunks(items, n):
    k = max(1, len(items) // n)
    return [items[i:i + k] for i in range(0, len(items), k)]


@lru_cache(maxsize=128)
def _basic_solutions(S: InequalitySystem) -> tuple[VertexRecord, ...]:
    if rank(S.A) < S.d:
        raise RankDeficient(f"rank(A) < d = {S.d}")
    rows = integer_rows([tuple(a) + (bi,) for a, bi in zip(S.A, S.b)])
    subsets = list(combinations(range(S.m), S.d))
    n = threads()
    if n > 1 and len(subsets) > PARALLEL_THRESHOLD:
        with ProcessPoolExecutor(max_workers=n) as pool:
            chunks = _chunks(subsets, 4 * n)
            parts = pool.map(_solve_subsets, [rows] * len(chunks), chunks)
            solved = [item for part in parts for item in part]
    else:
        solved = _solve_subsets(rows, subsets)
    by_point: dict[Vector, list[tuple[int, ...]]] = {}
    raw: dict[Vector, tuple[tuple[int, ...], int]] = {}
    for U, nums, den in solved:
        x = tuple(Fraction(v, den) for v in nums)
        by_point.setdefault(x, []).append(U)
        raw.setdefault(x, (nums, den))
    records = []
    for x in sorted(by_point):
        nums, den = raw[x]
        # sign of b_i - A_i x, scaled by den > 0
        slacks = [r[-1] * den - sum(c * v for c, v in zip(r, nums)) for r in rows]
        tight = frozenset(i for i, s in enumerate(slacks) if s == 0)
        records.append(VertexRecord(
            x, tight, tuple(Basis(U) for U in sorted(by_point[x])), all(s >= 0 for s in slacks)))
    return tuple(records)


def basic_solutions(S: InequalitySystem) -> tuple[VertexRecord, ...]:
    """All basic solutions, feasible and infeasible, merged by point."""
    return _basic_solutions(S)


def vertices(S: InequalitySystem) -> tuple[VertexRecord, ...]:
    return tuple(r for r in basic_solutions(S) if r.feasible)


def check_nondegenerate(S: InequalitySystem) -> CheckReport:
    bad = [(r.point, sorted(r.tight_rows)) for r in basic_solutions(S) if len(r.tight_rows) != S.d]
    return CheckReport(not bad, bad)


def _consistent(rows, rhs) -> bool:
    aug = [tuple(r) + (c,) for r, c in zip(rows, rhs)]
    return rank(rows) == rank(aug)


def check_totally_nondegenerate(S: InequalitySystem) -> CheckReport:
    for k in range(1, S.d + 2):
        for K in combinations(range(S.m), k):
            rows = [S.A[i] for i in K]
            rhs = [S.b[i] for i in K]
            if k <= S.d:
                if rank(rows) != k or not _consistent(rows, rhs):
                    return CheckReport(False, [{"rows": list(K), "k": k}])
            elif _consistent(rows, rhs):
                return CheckReport(False, [{"rows": list(K), "k": k}])
    return CheckReport(True)


# ----------------------------------------------------------- simplex cores, rays

def positive_dependency(rows: Sequence[Vector]) -> Optional[Vector]:
    """Strictly positive lambda with sum lambda_i rows_i = 0, if one exists.

    For d+1 rows in R^d this holds iff the rows positively span R^d with every
    d of them linearly independent.
    """
    n = len(rows)
    N = nullspace(transpose(rows), n)
    if len(N) != 1:
        return None
    lam = N[0]
    if all(v > 0 for v in lam):
        return lam
    if all(v < 0 for v in lam):
        return tuple(-v for v in lam)
    return None


def is_simplex_core(S: InequalitySystem, I: Sequence[int]) -> bool:
    I = list(I)
    if len(I) != S.d + 1 or len(set(I)) != len(I):
        return False
    lam = positive_dependency([S.A[i] for i in I])
    return lam is not None and dot(lam, [S.b[i] for i in I]) > 0


def find_simplex_subsystem(S: InequalitySystem) -> Optional[tuple[int, ...]]:
    """Lexicographically first d+1 rows that bound a full-dimensional simplex."""
    for I in combinations(range(S.m), S.d + 1):
        if is_simplex_core(S, I):
            return I
    return None


def extreme_rays(A: Sequence[Vector]) -> tuple[Vector, ...]:
    """Extreme rays of the pointed cone {r : A r <= 0}, as primitive integer vectors."""
    d = len(A[0])
    if rank(A) < d:
        raise RankDeficient("cone is not pointed")
    rows = integer_rows(A)
    rays = set()
    for T in combinations(range(len(rows)), d - 1):
        r = int_cross([rows[i] for i in T])
        if not any(r):
            continue
        for cand in (r, [-v for v in r]):
            if all(sum(x * y for x, y in zip(a, cand)) <= 0 for a in rows):
                rays.add(primitive([Fraction(v) for v in cand]))
    return tuple(sorted(rays))


def is_bounded(S: InequalitySystem) -> bool:
    if rank(S.A) < S.d:
        return False
    return not extreme_rays(S.A)


# ------------------------------------------------------------------------ graph

@lru_cache(maxsize=128)
def build_graph(S: InequalitySystem) -> PolytopeGraph:
    verts = vertices(S)
    if not verts:
        raise Empty("the polyhedron has no vertices")
    if not is_bounded(S):
        raise Unbounded("the polyhedron is unbounded")
    d = S.d
    rows = integer_rows(S.A)
    edges = []
    for i, j in combinations(range(len(verts)), 2):
        common = verts[i].tight_rows & verts[j].tight_rows
        if len(common) < d - 1:
            continue
        # both endpoints are feasible, so the segment lies in P by convexity
        if int_rank([rows[k] for k in sorted(common)]) == d - 1:
            edges.append((i, j))
    adj: list[list[int]] = [[] for _ in verts]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    return PolytopeGraph(S, verts, tuple(edges), tuple(tuple(a) for a in adj))


def _bfs(adj, source) -> list[Optional[int]]:
    dist: list[Optional[int]] = [None] * len(adj)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def diameter(G: PolytopeGraph) -> int:
    best = 0
    for s in range(len(G.vertices)):
        dist = _bfs(G.adjacency, s)
        if any(x is None for x in dist):
            raise Disconnected("graph is not connected")
        best = max(best, max(dist))
    return best


def top_vertex(G: PolytopeGraph, coord: int = -1) -> int:
    vals = [v.point[coord] for v in G.vertices]
    hi = max(vals)
    tops = [k for k, v in enumerate(vals) if v == hi]
    if len(tops) != 1:
        raise TopNotUnique(f"{len(tops)} vertices attain the maximum", [G.vertices[k].point for k in tops])
    return tops[0]


def z_increasing_distances(G: PolytopeGraph, coord: int, top: int) -> list[int]:
    vals = [v.point[coord] for v in G.vertices]
    if any(vals[k] >= vals[top] for k in range(len(vals)) if k != top):
        raise TopNotUnique("top is not the unique maximum")
    # reverse orientation: walk from top down to lower vertices
    down: list[list[int]] = [[] for _ in vals]
    for i, j in G.edges:
        if vals[i] < vals[j]:
            down[j].append(i)
        elif vals[j] < vals[i]:
            down[i].append(j)
    dist = _bfs(down, top)
    for k, x in enumerate(dist):
        if x is None:
            raise Unreachable(f"vertex {G.vertices[k].point} cannot reach the top", [G.vertices[k].point])
    return dist  # type: ignore[return-value]


def z_increasing_eccentricity(G: PolytopeGraph, coord: int, top: int) -> int:
    """Longest shortest strictly coord-increasing path to ``top``."""
    return max(z_increasing_distances(G, coord, top))


# ---------------------------------------------------------------- simplicity

def affine_rank(points: Sequence[Vector]) -> int:
    if not points:
        return -1
    p0 = points[0]
    diffs = [sub(p, p0) for p in points[1:]]
    return rank(diffs) if diffs else 0


def irredundant_rows(S: InequalitySystem) -> tuple[int, ...]:
    """Rows whose hyperplane contains a facet of the (full-dimensional) polytope."""
    G = build_graph(S)
    out = []
    for i in range(S.m):
        pts = [v.point for v in G.vertices if i in v.tight_rows]
        if len(pts) >= S.d and affine_rank(pts) == S.d - 1:
            out.append(i)
    return tuple(out)


def check_simplicity(S: InequalitySystem) -> CheckReport:
    G = build_graph(S)
    irr = set(irredundant_rows(S))
    bad = [(v.point, sorted(v.tight_rows & irr)) for v in G.vertices if len(v.tight_rows & irr) != S.d]
    return CheckReport(not bad, bad, {
        "irredundant_rows": sorted(irr),
        "redundant_rows": sorted(set(range(S.m)) - irr),
    })


# ------------------------------------------------------------- concentration

def check_epsilon_concentrated(Q: InequalitySystem, o: Sequence, h, eps) -> CheckReport:
    """Check that Q is eps-concentrated around (o, h).

    The last coordinate of Q is z. Rows whose first d coefficients vanish are
    the z-bounds and do not belong to the base polytope.
    """
    o, h, eps = vec(o), Fraction(h), Fraction(eps)
    center = o + (h,)
    G = build_graph(Q)
    witnesses = []
    zs = [v.point[-1] for v in G.vertices]
    zmax = max(zs)
    tops = [v.point for v, z in zip(G.vertices, zs) if z == zmax]
    if tops != [center]:
        witnesses.append({"condition": "a", "top_vertices": tops})
    for v in G.vertices:
        if v.point[-1] != 0 and norm2_sq(sub(v.point, center)) >= eps * eps:
            witnesses.append({"condition": "b", "vertex": v.point})
    for i, row in enumerate(Q.A):
        Ai = row[:-1]
        if all(x == 0 for x in Ai):
            continue
        s = Q.b[i] - dot(Ai, o)
        # the open ball of radius eps fits iff the distance is at least eps
        if s <= 0 or s * s < eps * eps * norm2_sq(Ai):
            witnesses.append({"condition": "c", "row": i})
    return CheckReport(not witnesses, witnesses)


def geometry_stats(S: InequalitySystem, o: Sequence) -> GeometryStats:
    o = vec(o)
    recs = basic_solutions(S)
    d1 = max(norm2_sq(sub(r.point, o)) for r in recs)
    norms = [ceil_sqrt(norm2_sq(a)) for a in S.A]
    d2 = None
    for r in recs:
        for i, a in enumerate(S.A):
            gap = abs(dot(a, r.point) - S.b[i])
            if gap:
                q = gap / norms[i]
                d2 = q if d2 is None or q < d2 else d2
    if d2 is None:
        d2 = Fraction(1)
    return GeometryStats(d1, Fraction(ceil_sqrt(d1)), d2)


# -------------------------------------------------------------------- oracle

def _pointed_optimum(S: InequalitySystem, c: Vector) -> SolveOutcome:
    verts = vertices(S)
    if not verts:
        return SolveOutcome("infeasible")
    for r in extreme_rays(S.A):
        if dot(c, r) < 0:
            return SolveOutcome("unbounded", ray=r)
    best = min(verts, key=lambda v: (dot(c, v.point), v.point))
    return SolveOutcome("optimal", best.defining_bases[0], best.point, dot(c, best.point))


def enumerate_optimum(S: InequalitySystem, c: Sequence) -> SolveOutcome:
    """Minimize c.x over S by brute force. Handles polyhedra with lines."""
    c = vec(c)
    r = rank(S.A)
    if r == S.d:
        return _pointed_optimum(S, c)
    # Reduce to the pivot columns: A x ranges over the same set.
    cols = row_echelon(S.A)[1]
    reduced = InequalitySystem(tuple(tuple(row[j] for j in cols) for row in S.A), S.b)
    in_rowspace = rank(list(S.A) + [c]) == r
    if not in_rowspace:
        feasible = bool(vertices(reduced))
        if not feasible:
            return SolveOutcome("infeasible")
        for n in nullspace(S.A, S.d):
            t = dot(c, n)
            if t != 0:
                ray = n if t < 0 else tuple(-v for v in n)
                return SolveOutcome("unbounded", ray=ray)
    sub_out = _pointed_optimum(reduced, tuple(c[j] for j in cols))
    if sub_out.status == "infeasible":
        return sub_out

    def embed(y):
        x = [Fraction(0)] * S.d
        for j, v in zip(cols, y):
            x[j] = v
        return tuple(x)

    if sub_out.status == "unbounded":
        return SolveOutcome("unbounded", ray=embed(sub_out.ray))
    x = embed(sub_out.vertex)
    return SolveOutcome("optimal", None, x, dot(c, x))
