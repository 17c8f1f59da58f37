"""Rock extensions, batched schedules, the crooked prism and monotone paths."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    ContainmentFailed,
    DegenerateSystem,
    DimensionMismatch,
    InputError,
    NoMonotonePath,
    NonPositiveCoefficient,
    NonPositiveRHS,
    NotAVertex,
    NotInterior,
    RetryExhausted,
    ScheduleInvalid,
    SimplexCoreInvalid,
    SingularMatrix,
    Unbounded,
)
from .exact import (
    Vector,
    dot,
    encoding_size,
    encoding_stats,
    norm1,
    norm2_sq,
    scale_to_integrality,
    solve_square,
    vec,
)
from .polytope import (
    CheckReport,
    basic_solutions,
    build_graph,
    check_nondegenerate,
    find_simplex_subsystem,
    geometry_stats,
    is_bounded,
    is_simplex_core,
    vertices,
)
from .system import Basis, InequalitySystem, as_indices

MODES = ("certified", "practical")
BOX_RETRY_CAP = 64


@dataclass(frozen=True)
class MuStep:
    row: int
    mu: Fraction
    eps_after: Fraction
    a: Fraction


@dataclass(frozen=True)
class RockParams:
    mode: str
    D: Fraction
    eps_initial: Fraction
    mu_schedule: tuple[MuStep, ...] = ()
    order: tuple[int, ...] = ()
    batches: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class RockExtension:
    """Q = {(x, z) : A x + a z <= b, z >= 0} over a centered integral base system."""

    base_system: InequalitySystem
    a: Vector
    Q_system: InequalitySystem
    params: RockParams
    simplex_core: tuple[int, ...]

    @property
    def d(self) -> int:
        return self.base_system.d

    @property
    def m(self) -> int:
        return self.base_system.m

    @property
    def top(self) -> Vector:
        return tuple(Fraction(0) for _ in range(self.d)) + (Fraction(1),)


@dataclass(frozen=True)
class PrismExtension:
    Q: RockExtension
    Qhat_system: InequalitySystem
    floor_row: int
    ceiling_row: int
    c_y: Optional[Fraction] = None


@dataclass(frozen=True)
class Shift:
    """Maps centered coordinates back to the original ones: x_orig = x + o."""

    o: Vector
    factors: tuple[int, ...]

    def to_original(self, x: Sequence[Fraction]) -> Vector:
        return tuple(a + b for a, b in zip(x, self.o))

    def to_centered(self, x: Sequence[Fraction]) -> Vector:
        return tuple(a - b for a, b in zip(x, self.o))


@dataclass(frozen=True)
class BatchSchedule:
    """Batches in loop order (outermost first) followed by the base rows."""

    batches: tuple[tuple[int, ...], ...]
    base: tuple[int, ...]

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(r for batch in self.batches for r in batch) + self.base


# ------------------------------------------------------------ augmentation

def _vertex_of(S: InequalitySystem, U) -> tuple[tuple[int, ...], Vector]:
    idx = as_indices(U)
    if len(idx) != S.d:
        raise NotAVertex(f"a vertex basis needs {S.d} rows")
    try:
        x = S.basic_solution(idx)
    except SingularMatrix:
        raise NotAVertex(f"rows {idx} are linearly dependent") from None
    if not S.is_feasible(x):
        raise NotAVertex(f"basic solution of {idx} is infeasible")
    return idx, x


def interior_point(S: InequalitySystem, U) -> Vector:
    """Point at distance below half the minimal vertex-hyperplane gap inside the vertex cone of U."""
    idx, xU = _vertex_of(S, U)
    S_int, _ = scale_to_integrality(S)
    stats = encoding_stats(S_int)
    A_U = [S.A[i] for i in idx]
    s = tuple(-v for v in solve_square(A_U, [Fraction(1)] * S.d))
    lam = Fraction(1, 2 * stats.two_pow(2) * S.d) / stats.delta1
    step = lam / norm1(s)
    o = tuple(x + step * v for x, v in zip(xU, s))
    if not S.is_strictly_feasible(o):
        raise NotInterior("the computed point is not strictly interior")
    return o


def box_inequality(S: InequalitySystem, U, retry_cap: int = BOX_RETRY_CAP):
    """Append a redundant row alpha x <= beta that closes the cone at x^U into a simplex.

    Returns (alpha, beta, augmented system). S is scaled to integrality first.
    """
    S, _ = scale_to_integrality(S)
    idx, _ = _vertex_of(S, U)
    d = S.d
    alpha = tuple(-sum((S.A[k][j] for k in idx), Fraction(0)) for j in range(d))
    stats = encoding_stats(S)
    beta0 = d * d * stats.delta1 * stats.two_pow(2) + 1
    top = max(dot(alpha, r.point) for r in basic_solutions(S))
    witnesses = []
    for retry in range(retry_cap + 1):
        beta = beta0 + retry
        if top >= beta:
            witnesses.append({"retry": retry, "dominated": False})
            continue
        S_aug = S.with_row(alpha, beta, "box")
        nd = check_nondegenerate(S_aug)
        if nd.ok:
            return alpha, Fraction(beta), S_aug
        witnesses.append({"retry": retry, "degenerate_points": nd.witnesses})
    raise RetryExhausted("no non-degenerate box inequality found", witnesses)


def recenter(S: InequalitySystem, o: Sequence) -> tuple[InequalitySystem, Shift]:
    o = vec(o)
    if not S.is_strictly_feasible(o):
        raise NotInterior("recentering point is not strictly interior")
    shifted = S.with_rhs(tuple(bi - dot(a, o) for a, bi in zip(S.A, S.b)))
    scaled, factors = scale_to_integrality(shifted)
    return scaled, Shift(o, factors)


# ---------------------------------------------------------- rock extension

def _delta1(S: InequalitySystem) -> Fraction:
    return max([abs(v) for r in S.A for v in r] + [abs(v) for v in S.b])


def compute_params(S: InequalitySystem, mode: str = "practical") -> RockParams:
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}")
    if any(bi <= 0 for bi in S.b):
        raise NonPositiveRHS("the origin must be interior (b > 0)")
    d = S.d
    delta1 = _delta1(S)
    eps = min(bi / (d * delta1) for bi in S.b)
    if mode == "certified":
        D = Fraction(25 * d ** 3) * delta1 * (1 << (6 * encoding_size(S)))
    else:
        gs = geometry_stats(S, [0] * d)
        t = gs.delta1_ub + Fraction(3, 2)
        D = max(Fraction(7), 4 * t * (1 + t / gs.delta2_lb) + 1)
    return RockParams(mode, D, eps)


def a_hat(S: InequalitySystem, i: int, mu) -> Fraction:
    """Rational tilt coefficient of row i for concentration radius mu."""
    mu = Fraction(mu)
    if not 0 < mu <= Fraction(1, 2):
        raise InputError("mu must lie in (0, 1/2]")
    d = S.d
    Ai, bi = S.A[i], S.b[i]
    a = (bi - mu / (2 * d) * (norm1(Ai) + bi)) / (1 - mu * mu)
    if a <= 0:
        raise NonPositiveCoefficient(f"row {i}: a_hat = {a} is not positive")
    gap = bi - a
    r = mu / (4 * d)
    if gap <= 0 or gap * gap < r * r * (norm2_sq(Ai) + a * a):
        raise ContainmentFailed(f"row {i}: ball of radius mu/4d is not contained")
    return a


def _q(t: Fraction, mu: Fraction, Ai, bi: Fraction) -> Fraction:
    return t * t * (1 - mu * mu) - 2 * t * bi + bi * bi - mu * mu * norm2_sq(Ai)


def check_sandwich(R: "RockExtension") -> CheckReport:
    """Algebraic check that each tilt sits between the exact mu and mu/4d tilts.

    The exact tilt a_i(mu) is the smaller root of q_mu, so a_hat >= a_i(mu)
    iff q_mu(a_hat) <= 0 with a_hat left of the vertex, and a_hat <= a_i(mu')
    iff q_mu'(a_hat) >= 0 with a_hat left of the vertex.
    """
    S, d = R.base_system, R.d
    bad = []
    for st in R.params.mu_schedule:
        Ai, bi, a = S.A[st.row], S.b[st.row], R.a[st.row]
        mu, mu2 = st.mu, st.mu / (4 * d)
        if not (_q(a, mu, Ai, bi) <= 0 and a <= bi / (1 - mu * mu)):
            bad.append({"row": st.row, "side": "lower"})
        if not (_q(a, mu2, Ai, bi) >= 0 and a <= bi / (1 - mu2 * mu2)):
            bad.append({"row": st.row, "side": "upper"})
    return CheckReport(not bad, bad, {"rows": [st.row for st in R.params.mu_schedule]})


def _q_system(S: InequalitySystem, a: Sequence[Fraction]) -> InequalitySystem:
    rows = tuple(tuple(Ai) + (ai,) for Ai, ai in zip(S.A, a))
    zrow = tuple(Fraction(0) for _ in range(S.d)) + (Fraction(-1),)
    labels = S.labels + ("z>=0",) if S.labels else None
    return InequalitySystem(rows + (zrow,), S.b + (Fraction(0),), labels)


def rock_extension(S: InequalitySystem, I: Sequence[int], mode: str = "practical",
                   order: Optional[Sequence[int]] = None, params: Optional[RockParams] = None,
                   batches: Sequence[Sequence[int]] = ()) -> RockExtension:
    """Compute the tilt vector a row by row, outermost row first."""
    if not S.is_integral():
        raise InputError("the base system must be integral")
    if any(bi <= 0 for bi in S.b):
        raise NonPositiveRHS("the origin must be interior (b > 0)")
    I = tuple(sorted(I))
    if not is_simplex_core(S, I):
        raise SimplexCoreInvalid(f"rows {I} do not bound a simplex")
    rest = [j for j in range(S.m) if j not in I]
    order = tuple(rest if order is None else order)
    if sorted(order) != rest:
        raise InputError("order must list every row outside the core exactly once")
    if params is None:
        params = compute_params(S, mode)
    d = S.d
    a: list[Optional[Fraction]] = [None] * S.m
    for i in I:
        a[i] = S.b[i]
    cap = min(min(4 * d * bi / (norm1(Ai) + bi) for Ai, bi in zip(S.A, S.b)), Fraction(1, 4 * d))
    eps = params.eps_initial
    steps = []
    for j in order:
        mu = min(cap, eps / params.D)
        a[j] = a_hat(S, j, mu)
        eps = mu / (4 * d)
        steps.append(MuStep(j, mu, eps, a[j]))
    params = replace(params, mu_schedule=tuple(steps), order=order,
                     batches=tuple(tuple(b) for b in batches))
    av = tuple(a)  # type: ignore[arg-type]
    return RockExtension(S, av, _q_system(S, av), params, I)


def rock_from_q(Q: InequalitySystem, core: Optional[Sequence[int]] = None,
                params: Optional[RockParams] = None) -> RockExtension:
    """Rebuild a RockExtension record from a Q system (last row is z >= 0)."""
    base = InequalitySystem(tuple(r[:-1] for r in Q.A[:-1]), Q.b[:-1],
                            Q.labels[:-1] if Q.labels else None)
    a = tuple(r[-1] for r in Q.A[:-1])
    if core is None:
        core = tuple(i for i in range(base.m) if a[i] == base.b[i])
    if params is None:
        params = RockParams("unknown", Fraction(0), Fraction(0))
    return RockExtension(base, a, Q, params, tuple(core))


# ---------------------------------------------------------------- batching

def _polygon_cycle(S: InequalitySystem) -> list[int]:
    """Rows of the polygon's edges in cyclic boundary order."""
    G = build_graph(S)
    n = len(G.vertices)
    order = [0]
    prev = None
    while len(order) < n:
        cur = order[-1]
        nxt = [v for v in G.adjacency[cur] if v != prev and v not in order]
        if not nxt:
            break
        prev = cur
        order.append(nxt[0])
    rows = []
    for k in range(len(order)):
        u, v = G.vertices[order[k]], G.vertices[order[(k + 1) % len(order)]]
        common = sorted(u.tight_rows & v.tight_rows)
        rows.append(common[0])
    return rows


def _alternate(run: list[int]) -> list[int]:
    return run[::2]


def batch_schedule_2d(S: InequalitySystem, I: Sequence[int]) -> BatchSchedule:
    """Alternate-edge batches for polygons, recursing until at most five rows remain."""
    if S.d != 2:
        raise DimensionMismatch("the 2D schedule needs d = 2")
    core = set(I)
    active = list(range(S.m))
    batches = []
    while len(active) > 5:
        sub = S.subsystem(active)
        cycle = [active[k] for k in _polygon_cycle(sub)]
        core_pos = [k for k, r in enumerate(cycle) if r in core]
        picked: list[int] = []
        if not core_pos:
            picked = cycle[0:len(cycle) - 1:2]
        else:
            start = core_pos[0]
            rotated = cycle[start:] + cycle[:start]
            run: list[int] = []
            for r in rotated[1:] + [rotated[0]]:
                if r in core:
                    picked += _alternate(run)
                    run = []
                else:
                    run.append(r)
        if not picked:
            break
        batches.append(tuple(sorted(picked)))
        active = [r for r in active if r not in picked]
    base = tuple(r for r in active if r not in core)
    return BatchSchedule(tuple(batches), base)


def _facet_conflicts(S: InequalitySystem, rows: Sequence[int]) -> dict[int, set[int]]:
    """For each given row, the given rows whose facets meet it in the polytope S."""
    G = build_graph(S)
    conflicts: dict[int, set[int]] = {r: set() for r in rows}
    rowset = set(rows)
    for v in G.vertices:
        here = [r for r in v.tight_rows if r in rowset]
        for r in here:
            conflicts[r].update(x for x in here if x != r)
    return conflicts


def batch_schedule_3d(S: InequalitySystem, I: Sequence[int]) -> BatchSchedule:
    """Greedy minimum-degree independent sets on the facet graph, level by level."""
    if S.d != 3:
        raise DimensionMismatch("the 3D schedule needs d = 3")
    core = set(I)
    active = list(range(S.m))
    batches = []
    while len(active) > S.d + 2:
        noncore = [r for r in active if r not in core]
        if not noncore:
            break
        sub = S.subsystem(active)
        local = {g: k for k, g in enumerate(active)}
        conf_local = _facet_conflicts(sub, [local[r] for r in noncore])
        graph = {active[k]: {active[x] for x in nb} for k, nb in conf_local.items()}
        picked = []
        alive = set(noncore)
        while alive:
            v = min(alive, key=lambda r: (len(graph[r] & alive), r))
            picked.append(v)
            alive -= graph[v] | {v}
        batches.append(tuple(sorted(picked)))
        active = [r for r in active if r not in picked]
    base = tuple(r for r in active if r not in core)
    return BatchSchedule(tuple(batches), base)


def rock_extension_batched(S: InequalitySystem, I: Sequence[int],
                           schedule: Union[BatchSchedule, Sequence[Sequence[int]]],
                           mode: str = "practical") -> RockExtension:
    core = tuple(sorted(I))
    if not isinstance(schedule, BatchSchedule):
        used = {r for b in schedule for r in b}
        schedule = BatchSchedule(tuple(tuple(b) for b in schedule),
                                 tuple(r for r in range(S.m) if r not in core and r not in used))
    order = schedule.order
    if sorted(order) != [r for r in range(S.m) if r not in core]:
        raise ScheduleInvalid("schedule must cover every non-core row exactly once")
    for k, batch in enumerate(schedule.batches):
        level = sorted(set(core) | set(schedule.base) | {r for b in schedule.batches[k:] for r in b})
        sub = S.subsystem(level)
        local = {g: n for n, g in enumerate(level)}
        conflicts = _facet_conflicts(sub, [local[r] for r in batch])
        for r in batch:
            clash = conflicts[local[r]]
            if clash:
                other = level[min(clash)]
                raise ScheduleInvalid(f"rows {r} and {other} meet at level {k}", [(r, other)])
    return rock_extension(S, core, mode, order=order, batches=schedule.batches)


# ---------------------------------------------------------------- the prism

def crooked_prism(R: RockExtension) -> PrismExtension:
    """Tilted prism over Q in variables (x, z, y) with floor y >= z/3 and ceiling y <= 1 - z/3."""
    Q = R.Q_system
    rows = tuple(r + (Fraction(0),) for r in Q.A)
    zeros = tuple(Fraction(0) for _ in range(R.d))
    floor = zeros + (Fraction(1), Fraction(-3))
    ceiling = zeros + (Fraction(1), Fraction(3))
    labels = Q.labels + ("floor", "ceiling") if Q.labels else None
    Qhat = InequalitySystem(rows + (floor, ceiling), Q.b + (Fraction(0), Fraction(3)), labels)
    return PrismExtension(R, Qhat, Q.m, Q.m + 1)


def lifts(u: Sequence[Fraction]) -> tuple[Vector, Vector]:
    """The two copies of a vertex (x, z) of Q in the floor and ceiling facets."""
    z = u[-1]
    return tuple(u) + (z / 3,), tuple(u) + (1 - z / 3,)


def _integral_objective(c: Sequence) -> Vector:
    c = vec(c)
    den = lcm(*(x.denominator for x in c))
    return tuple(x * den for x in c)


def _effective(c_hat: Sequence[Fraction], d: int, sense: str) -> Vector:
    if sense not in ("min", "max"):
        raise InputError("sense must be 'min' or 'max'")
    c_hat = vec(c_hat)
    if sense == "min":
        return tuple(-x for x in c_hat[:d]) + c_hat[d:]
    return c_hat


def monotone_bound(R: RockExtension) -> int:
    return 2 * (R.m - R.d + 1) + 1


def _monotone_bfs(G, obj: Vector, start: int) -> list[int]:
    vals = [dot(obj, v.point) for v in G.vertices]
    best = max(vals)
    prev: dict[int, Optional[int]] = {start: None}
    q = deque([start])
    while q:
        u = q.popleft()
        if vals[u] == best:
            path = [u]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])  # type: ignore[arg-type]
            return path[::-1]
        for v in G.adjacency[u]:
            if v not in prev and vals[v] > vals[u]:
                prev[v] = u
                q.append(v)
    raise NoMonotonePath(f"no monotone path from {G.vertices[start].point}")


def monotone_path(prism: PrismExtension, c_hat: Sequence, start: Sequence, sense: str = "min") -> tuple[Vector, ...]:
    """Shortest strictly c_hat-improving path from (start, 0, 0) to an optimal vertex of Q-hat."""
    d = prism.Q.d
    obj = _effective(c_hat, d, sense)
    G = build_graph(prism.Qhat_system)
    s = G.index_of(tuple(vec(start)) + (Fraction(0), Fraction(0)))
    return tuple(G.vertices[k].point for k in _monotone_bfs(G, obj, s))


def verify_monotone_paths(prism: PrismExtension, c_hat: Sequence, sense: str = "min") -> CheckReport:
    """Check the path-length bound and endpoint optimality from every base vertex."""
    R = prism.Q
    d = R.d
    c = vec(c_hat)[:d]
    sign = 1 if sense == "min" else -1
    base = [v.point for v in vertices(R.base_system)]
    target = min(sign * dot(c, v) for v in base)
    bound = monotone_bound(R)
    lengths, witnesses = {}, []
    for v in base:
        path = monotone_path(prism, c_hat, v, sense)
        end = path[-1][:d]
        lengths[v] = len(path) - 1
        if len(path) - 1 > bound or sign * dot(c, end) != target:
            witnesses.append({"start": v, "length": len(path) - 1, "end": end})
    return CheckReport(not witnesses, witnesses, {"bound": bound, "lengths": lengths})


def certified_c_y(R: RockExtension, c: Sequence) -> Fraction:
    c_int = _integral_objective(c)
    rows = InequalitySystem(R.Q_system.A[:-1], R.Q_system.b[:-1])
    scaled, _ = scale_to_integrality(rows)
    return 6 * norm1(c_int) * (1 << (8 * encoding_size(scaled))) + 1


def lift_objective(R: RockExtension, c: Sequence, mode: str = "certified",
                   prism: Optional[PrismExtension] = None) -> tuple[Vector, Fraction]:
    """Lift c to (c, 0, c_y); c is first scaled to an integral vector."""
    c = vec(c)
    if len(c) != R.d:
        raise DimensionMismatch("objective length differs from the dimension")
    if all(x == 0 for x in c):
        return c + (Fraction(0), Fraction(1)), Fraction(1)
    c_int = _integral_objective(c)
    cert = certified_c_y(R, c_int)
    if mode == "certified":
        return c_int + (Fraction(0), cert), cert
    if mode != "practical":
        raise InputError(f"unknown mode {mode!r}")
    prism = prism or crooked_prism(R)
    c_y = Fraction(1)
    while c_y < cert:
        c_hat = c_int + (Fraction(0), c_y)
        if verify_monotone_paths(prism, c_hat).ok:
            return c_hat, c_y
        c_y *= 2
    return c_int + (Fraction(0), cert), cert


# ---------------------------------------------------------------- pipeline

@dataclass(frozen=True)
class RockBuild:
    """Everything produced on the way from an input polytope to its rock extension."""

    original: InequalitySystem
    augmented: InequalitySystem
    box_row: Optional[int]
    vertex_basis: tuple[int, ...]
    shift: Shift
    extension: RockExtension
    schedule: Optional[BatchSchedule] = None

    @property
    def diameter_bound(self) -> int:
        R = self.extension
        return 2 * (R.m - R.d)


def first_vertex_basis(S: InequalitySystem) -> tuple[int, ...]:
    verts = vertices(S)
    if not verts:
        raise NotAVertex("the polytope has no vertex")
    return verts[0].defining_bases[0].indices


def build_rock(S: InequalitySystem, mode: str = "practical", batched: bool = False,
               vertex: Optional[Iterable[int]] = None, core: Optional[Sequence[int]] = None,
               order: Optional[Sequence[int]] = None) -> RockBuild:
    """Augment (if needed), center at an interior point and build the rock extension."""
    S_int, _ = scale_to_integrality(S)
    nd = check_nondegenerate(S_int)
    if not nd.ok:
        point, rows = nd.witnesses[0]
        raise DegenerateSystem(f"degenerate at {tuple(str(v) for v in point)} (rows {rows})", nd.witnesses)
    if not is_bounded(S_int):
        raise Unbounded("the input polytope is unbounded")
    U = tuple(sorted(vertex)) if vertex is not None else first_vertex_basis(S_int)
    _vertex_of(S_int, U)
    box_row = None
    if core is None:
        core = find_simplex_subsystem(S_int)
        if core is None:
            _, _, S_int = box_inequality(S_int, U)
            box_row = S_int.m - 1
            core = tuple(sorted(U)) + (box_row,)
    o = interior_point(S_int, U)
    centered, shift = recenter(S_int, o)
    schedule = None
    if batched:
        if centered.d == 2:
            schedule = batch_schedule_2d(centered, core)
        elif centered.d == 3:
            schedule = batch_schedule_3d(centered, core)
        else:
            raise DimensionMismatch("batched schedules exist for d = 2 and d = 3 only")
        ext = rock_extension_batched(centered, core, schedule, mode)
    else:
        ext = rock_extension(centered, core, mode, order=order)
    return RockBuild(S, S_int, box_row, U, shift, ext, schedule)
