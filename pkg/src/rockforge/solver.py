"""Exact simplex on row bases, Phase I, and the perturb/box/solve/transfer pipeline."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm
from typing import Optional, Sequence

from .construct import (
    box_inequality,
    build_rock,
    crooked_prism,
    lift_objective,
    monotone_bound,
    _effective,
)
from .errors import (
    CycleDetected,
    DimensionMismatch,
    InputError,
    NotAVertex,
    NotSimpleAtVertex,
    SingularMatrix,
    StartInfeasible,
    TransferInfeasible,
)
from .exact import Vector, dot, mat, primitive, solve_square, vec
from .perturb import PerturbedSystem, choose_epsilon, transfer_basis
from .polytope import check_nondegenerate, is_bounded
from .system import Basis, InequalitySystem, SolveOutcome


# ---------------------------------------------------------------- pivot rules

@dataclass(frozen=True)
class PivotRule:
    """Chooses the leaving row among rows with a negative multiplier.

    Ties always go to the lowest row index, also in the ratio test.
    """

    name: str = "bland"
    seed: int = 0

    def __post_init__(self):
        if self.name not in ("bland", "dantzig", "random"):
            raise InputError(f"unknown pivot rule {self.name!r}")

    @classmethod
    def parse(cls, rule) -> "PivotRule":
        if isinstance(rule, PivotRule):
            return rule
        name, _, seed = str(rule).partition(":")
        return cls(name, int(seed) if seed else 0)

    def __str__(self) -> str:
        return f"random:{self.seed}" if self.name == "random" else self.name


@dataclass(frozen=True)
class StrongInput:
    """A non-degenerate bounded system together with one of its vertices."""

    system: InequalitySystem
    start_basis: Basis
    start_vertex: Vector = field(default=())
    verified: bool = True

    @classmethod
    def build(cls, S: InequalitySystem, U, verify: bool = True) -> "StrongInput":
        B = Basis(U)
        if len(B.indices) != S.d:
            raise NotAVertex("a basis needs exactly d rows")
        try:
            x = S.basic_solution(B.indices)
        except SingularMatrix:
            raise NotAVertex(f"rows {B.indices} are linearly dependent") from None
        if not S.is_feasible(x):
            raise NotAVertex(f"basic solution of {B.indices} is infeasible")
        if verify:
            nd = check_nondegenerate(S)
            if not nd.ok:
                raise InputError("strong input must be non-degenerate", nd.witnesses)
            if not is_bounded(S):
                raise InputError("strong input must be bounded")
        return cls(S, B, x, verify)


# ------------------------------------------------------------------- simplex

def _multipliers(S: InequalitySystem, U: Sequence[int], c: Vector) -> Vector:
    # c + A_U^T lam = 0
    return solve_square([tuple(S.A[i][j] for i in U) for j in range(S.d)], [-v for v in c])


def _direction(S: InequalitySystem, U: Sequence[int], k: int) -> Vector:
    # A_U r = -e_k: leave row U[k], stay on the others
    rhs = [Fraction(-int(p == k)) for p in range(len(U))]
    return solve_square([S.A[i] for i in U], rhs)


def _leaving(lam: Vector, U: Sequence[int], rule: PivotRule, rng: Optional[random.Random]) -> Optional[int]:
    neg = [p for p, v in enumerate(lam) if v < 0]
    if not neg:
        return None
    if rule.name == "bland":
        return min(neg, key=lambda p: U[p])
    if rule.name == "dantzig":
        return min(neg, key=lambda p: (lam[p], U[p]))
    return rng.choice(sorted(neg, key=lambda p: U[p]))  # type: ignore[union-attr]


def _ratio(S: InequalitySystem, U: Sequence[int], x: Vector, r: Vector):
    best, enter = None, None
    inU = set(U)
    for i in range(S.m):
        if i in inU:
            continue
        ar = dot(S.A[i], r)
        if ar > 0:
            t = (S.b[i] - dot(S.A[i], x)) / ar
            if best is None or t < best:
                best, enter = t, i
    return best, enter


def run_simplex(S: InequalitySystem, U, c: Sequence, rule="bland",
                cap: Optional[int] = None) -> SolveOutcome:
    """Minimize c.x over S starting from the feasible basis U.

    Every basis exchange counts as one step. A revisited basis raises
    CycleDetected; on non-degenerate systems this cannot happen.
    """
    rule = PivotRule.parse(rule)
    rng = random.Random(rule.seed) if rule.name == "random" else None
    c = vec(c)
    if len(c) != S.d:
        raise DimensionMismatch("objective length differs from the dimension")
    U = tuple(sorted(U))
    x = S.basic_solution(U)
    if not S.is_feasible(x):
        raise StartInfeasible(f"start basis {U} is infeasible")
    cap = cap or comb(S.m, S.d) + 1
    seen = {U}
    path = [x]
    steps = 0
    while True:
        lam = _multipliers(S, U, c)
        k = _leaving(lam, U, rule, rng)
        if k is None:
            return SolveOutcome("optimal", Basis(U), x, dot(c, x), steps, None, tuple(path))
        r = _direction(S, U, k)
        t, enter = _ratio(S, U, x, r)
        if enter is None:
            return SolveOutcome("unbounded", Basis(U), x, None, steps, r, tuple(path))
        U = tuple(sorted(set(U) - {U[k]} | {enter}))
        x = tuple(xi + t * ri for xi, ri in zip(x, r))
        steps += 1
        path.append(x)
        if U in seen or steps > cap:
            raise CycleDetected(f"basis {U} revisited after {steps} steps", [U])
        seen.add(U)


def simplex_solve(inp: StrongInput, c: Sequence, rule="bland") -> SolveOutcome:
    return run_simplex(inp.system, inp.start_basis.indices, c, rule)


# ------------------------------------------------------------------- Phase I

@dataclass(frozen=True)
class PhaseOne:
    outcome: SolveOutcome
    G: InequalitySystem
    start: Vector
    start_basis: Basis
    vertex: Optional[Vector]
    basis: Optional[Basis]

    @property
    def feasible(self) -> bool:
        return self.vertex is not None


def phase_one(P: PerturbedSystem) -> PhaseOne:
    """Minimize 1^T s over G = {Ax - s <= b + b_eps, -x <= o_eps, s >= 0}.

    ``P`` must come from perturb_with_nonneg. G's rows are the m main rows,
    then the d sign rows, then the m rows -s <= 0.
    """
    if not P.nonneg_rows:
        raise InputError("phase_one needs a system from perturb_with_nonneg")
    S = P.perturbed
    d = S.d
    m = S.m - d
    eps = P.epsilon
    zero_s = (Fraction(0),) * m

    def e(n, k, v=Fraction(-1)):
        return tuple(v if i == k else Fraction(0) for i in range(n))

    rows, rhs = [], []
    for i in range(m):
        rows.append(S.A[i] + e(m, i))
        rhs.append(S.b[i])
    for j in range(d):
        rows.append(e(d, j) + zero_s)
        rhs.append(S.b[m + j])
    for i in range(m):
        rows.append((Fraction(0),) * d + e(m, i))
        rhs.append(Fraction(0))
    G = InequalitySystem(tuple(rows), tuple(rhs))

    x0 = tuple(-eps ** (m + j + 1) for j in range(d))
    s0 = tuple(max(dot(S.A[i], x0) - S.b[i], Fraction(0)) for i in range(m))
    start = x0 + s0
    # main row i is tight when s_i > 0, otherwise s_i >= 0 is
    U0 = tuple(sorted([m + j for j in range(d)]
                      + [i if s0[i] > 0 else m + d + i for i in range(m)]))
    if not G.is_feasible(start) or G.basic_solution(U0) != start:
        raise StartInfeasible("the Phase I start is not the basic solution of its basis")
    if m == 0:
        out = SolveOutcome("optimal", Basis(U0), start, Fraction(0), 0, None, (start,))
    else:
        cG = (Fraction(0),) * d + (Fraction(1),) * m
        out = run_simplex(G, U0, cG, "bland")
    if out.objective != 0:
        return PhaseOne(out, G, start, Basis(U0), None, None)
    x = out.vertex[:d]
    tight = tuple(i for i in range(S.m) if S.slack(i, x) == 0)
    if len(tight) != d:
        raise NotSimpleAtVertex(f"Phase I vertex lies on {len(tight)} rows", [tight])
    return PhaseOne(out, G, start, Basis(U0), x, Basis(tight))


# ---------------------------------------------------------- alpha interpretation

def escape_ray(S: InequalitySystem, W: Sequence[int], alpha_row: int) -> Vector:
    """Ray of the vertex cone at x^W that leaves the alpha facet, pointing outward.

    It solves A_W r = e_alpha, so it violates only the alpha row.
    """
    W = tuple(sorted(W))
    if len(W) != S.d:
        raise NotSimpleAtVertex("basis size differs from the dimension")
    rhs = [Fraction(int(i == alpha_row)) for i in W]
    return solve_square([S.A[i] for i in W], rhs)


def interpret_alpha_basis(out: SolveOutcome, alpha_row: int, c: Sequence,
                          S_aug: InequalitySystem) -> SolveOutcome:
    """Decide whether an optimum over the boxed system is a real optimum.

    When the box row is in the optimal basis, the edge leaving the box facet
    is an edge of the unboxed polyhedron. If c decreases along its outward
    direction the original problem is unbounded. If c is constant on it, the
    walk continues inward to a vertex off the box facet.
    """
    c = vec(c)
    if out.status != "optimal" or out.basis is None or alpha_row not in out.basis.indices:
        return out
    W = out.basis.indices
    x = out.vertex
    tight = [i for i in range(S_aug.m) if S_aug.slack(i, x) == 0]
    if len(tight) != S_aug.d:
        raise NotSimpleAtVertex(f"optimal vertex lies on {len(tight)} rows", [tight])
    rho = escape_ray(S_aug, W, alpha_row)
    t = dot(c, rho)
    if t < 0:
        return SolveOutcome("unbounded", out.basis, x, None, out.steps, rho, out.path, {"alpha_row": alpha_row})
    if t > 0:
        # c.rho = -lambda_alpha <= 0 at an optimal basis
        raise InputError("basis is not optimal for c")
    inward = tuple(-v for v in rho)
    step, enter = _ratio(S_aug, W, x, inward)
    if enter is None:
        raise NotSimpleAtVertex("inward edge from the box facet does not end")
    W2 = tuple(sorted(set(W) - {alpha_row} | {enter}))
    x2 = tuple(xi + step * ri for xi, ri in zip(x, inward))
    return SolveOutcome("optimal", Basis(W2), x2, dot(c, x2), out.steps + 1, None, out.path + (x2,),
                        {"alpha_row": alpha_row, "moved_off_box": True})


# ----------------------------------------------------------------- walk_rock

@dataclass(frozen=True)
class Walk:
    steps: int
    path: tuple[Vector, ...]
    bound: int
    within_bound: bool
    outcome: SolveOutcome
    c_hat: Vector

    @property
    def endpoint(self) -> Vector:
        return self.path[-1]


def walk_rock(prism, c: Sequence, start: Sequence, rule="bland",
              c_hat: Optional[Sequence] = None, mode: str = "practical") -> Walk:
    """Run the simplex method on Q-hat from the floor lift of ``start``.

    The walk minimizes c over P by maximizing the lifted objective, so it
    minimizes (c, 0, -c_y). Exceeding the path-length bound is reported, not
    raised.
    """
    R = prism.Q
    d = R.d
    c = vec(c)
    if c_hat is None:
        c_hat, _ = lift_objective(R, c, mode, prism)
    obj = _effective(c_hat, d, "min")
    Qh = prism.Qhat_system
    p = tuple(vec(start)) + (Fraction(0), Fraction(0))
    U = tuple(i for i in range(Qh.m) if Qh.slack(i, p) == 0)
    if len(U) != Qh.d or not Qh.is_feasible(p):
        raise NotAVertex(f"{tuple(map(str, start))} does not lift to a simple vertex of the prism")
    out = run_simplex(Qh, U, tuple(-v for v in obj), rule)
    bound = monotone_bound(R)
    return Walk(out.steps, out.path, bound, out.steps <= bound, out, tuple(vec(c_hat)))


# ------------------------------------------------------------------ pipeline

def _scale_rows(A, b):
    rows, rhs = [], []
    for Ai, bi in zip(A, b):
        f = lcm(*(v.denominator for v in Ai), bi.denominator)
        rows.append(tuple(v * f for v in Ai))
        rhs.append(bi * f)
    return rows, rhs


def _integral(c: Vector) -> Vector:
    f = lcm(*(v.denominator for v in c)) if c else 1
    return tuple(v * f for v in c)


def nonneg_system(A, b) -> InequalitySystem:
    """{Ax <= b, -x <= 0} with the main rows first."""
    A, b = mat(A), vec(b)
    d = len(A[0]) if A else 0
    rows, rhs = _scale_rows(A, b)
    rows += [tuple(Fraction(-int(i == j)) for i in range(d)) for j in range(d)]
    rhs += [Fraction(0)] * d
    labels = tuple(f"r{i}" for i in range(len(A))) + tuple(f"x{j}>=0" for j in range(d))
    return InequalitySystem(tuple(rows), tuple(rhs), labels)


def _solve_nonneg(A, b, c: Vector, eps_mode: str, rule, via: str) -> SolveOutcome:
    S = nonneg_system(A, b)
    d, m = S.d, S.m - S.d
    c_int = _integral(c)
    P = choose_epsilon(S, c_int, eps_mode, nonneg=True)
    info = {"epsilon": P.epsilon, "provenance": P.provenance}
    ph = phase_one(P)
    info["phase_one_steps"] = ph.outcome.steps
    if not ph.feasible:
        return SolveOutcome("infeasible", steps=ph.outcome.steps, info=info)

    W0 = ph.basis.indices  # type: ignore[union-attr]
    alpha, beta, S_aug = box_inequality(P.scaled, W0)
    box = S_aug.m - 1
    info["box_row"] = box
    if via == "direct":
        out = run_simplex(S_aug, W0, c_int, rule)
    elif via == "prism":
        out = _via_prism(S_aug, W0, c_int, rule)
    else:
        raise InputError(f"unknown route {via!r}")
    out = interpret_alpha_basis(out, box, c_int, S_aug)
    steps = ph.outcome.steps + out.steps
    info["simplex_steps"] = out.steps
    if out.status == "unbounded":
        ray = out.ray
        if any(dot(a, ray) > 0 for a in S.A):
            raise TransferInfeasible("escape ray is not a recession direction")
        return SolveOutcome("unbounded", steps=steps, ray=primitive(ray), info=info)
    W = out.basis.indices  # type: ignore[union-attr]
    if box in W:
        raise NotSimpleAtVertex("box row survived in the final basis")
    tr = transfer_basis(W, P)
    info["perturbed_vertex"] = tr.perturbed_vertex
    x = tr.vertex
    return SolveOutcome("optimal", Basis(P.row_map[i] for i in W), x, dot(c, x), steps, None, (), info)


def _via_prism(S_aug: InequalitySystem, W0, c: Vector, rule, cap: int = 256) -> SolveOutcome:
    """Walk on the prism over the rock extension of S_aug, then certify.

    c_y doubles until the walk ends over a vertex that the exact optimality
    test accepts, so the prism graph is never enumerated here.
    """
    B = build_rock(S_aug, mode="practical", vertex=W0)
    prism = crooked_prism(B.extension)
    start = B.shift.to_centered(S_aug.basic_solution(W0))
    c_int = _integral(c)
    total = 0
    for k in range(cap):
        c_hat = c_int + (Fraction(0), Fraction(1 << k))
        w = walk_rock(prism, c, start, rule, c_hat=c_hat)
        total += w.steps
        y = B.shift.to_original(w.endpoint[:S_aug.d])
        U = tuple(i for i in range(S_aug.m) if S_aug.slack(i, y) == 0)
        if len(U) != S_aug.d:
            raise NotSimpleAtVertex("prism walk ended off a simple vertex")
        out = run_simplex(S_aug, U, c, "bland")
        if out.steps == 0:
            break
    return SolveOutcome(out.status, out.basis, out.vertex, out.objective, total + out.steps,
                        out.ray, out.path, {"prism_steps": w.steps, "c_y": c_hat[-1]})


def solve_lp(A, b, c, form: str = "nonneg-split", eps_mode: str = "auto",
             rule="bland", via: str = "direct") -> SolveOutcome:
    """Minimize c.x subject to Ax <= b (and x >= 0 in nonneg-split form).

    The result is exact for the input data: the optimal vertex, its objective
    value, or an unbounded ray r with A r <= 0 and c.r < 0.
    """
    A, b, c = mat(A), vec(b), vec(c)
    if not A or len(A) != len(b):
        raise InputError("A and b must have the same positive number of rows")
    d = len(A[0])
    if len(c) != d:
        raise DimensionMismatch("objective length differs from the number of columns")
    if form == "nonneg-split":
        return _solve_nonneg(A, b, c, eps_mode, rule, via)
    if form != "inequality":
        raise InputError(f"unknown form {form!r}")
    # x = x+ - x-
    A2 = tuple(r + tuple(-v for v in r) for r in A)
    c2 = c + tuple(-v for v in c)
    out = _solve_nonneg(A2, b, c2, eps_mode, rule, via)
    info = dict(out.info, split=True)
    if out.status == "optimal":
        x = tuple(p - q for p, q in zip(out.vertex[:d], out.vertex[d:]))
        return SolveOutcome("optimal", None, x, dot(c, x), out.steps, None, (), info)
    if out.status == "unbounded":
        r = primitive([p - q for p, q in zip(out.ray[:d], out.ray[d:])])
        return SolveOutcome("unbounded", None, None, None, out.steps, r, (), info)
    return SolveOutcome(out.status, steps=out.steps, info=info)
