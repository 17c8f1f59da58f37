import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rockforge import fixtures as fx
from rockforge.construct import _effective, box_inequality, crooked_prism, lift_objective, lifts
from rockforge.errors import CycleDetected, InputError, NotAVertex, StartInfeasible
from rockforge.exact import dot
from rockforge.perturb import perturb_with_nonneg
from rockforge.polytope import check_nondegenerate, enumerate_optimum, is_bounded, vertices
from rockforge.solver import (
    PivotRule,
    StrongInput,
    escape_ray,
    interpret_alpha_basis,
    nonneg_system,
    phase_one,
    run_simplex,
    simplex_solve,
    solve_lp,
    walk_rock,
)
from rockforge.system import InequalitySystem
from suite import random_system, rock, unit_sweep


# ---------------------------------------------------------------- pivot rules

def test_pivot_rule_parse():
    assert PivotRule.parse("bland") == PivotRule("bland")
    r = PivotRule.parse("random:5")
    assert (r.name, r.seed, str(r)) == ("random", 5, "random:5")
    with pytest.raises(InputError):
        PivotRule.parse("steepest")


# -------------------------------------------------------------------- simplex

def test_triangle_example():
    inp = StrongInput.build(fx.triangle(), (0, 1))
    out = simplex_solve(inp, (-1, -1))
    assert out.status == "optimal" and out.objective == -1 and out.steps <= 2


def test_square_example():
    inp = StrongInput.build(fx.square(), (0, 2))
    assert inp.start_vertex == (1, 1)
    for rule in ("bland", "dantzig", "random:3"):
        out = simplex_solve(inp, (1, 0), rule)
        assert out.objective == -1 == enumerate_optimum(fx.square(), (1, 0)).objective


def test_optimal_start_takes_no_steps():
    out = run_simplex(fx.square(), (1, 3), (1, 1))
    assert out.steps == 0 and out.vertex == (-1, -1)


def test_strong_input_validation():
    with pytest.raises(NotAVertex):
        StrongInput.build(fx.square(), (0, 1))
    with pytest.raises(InputError):
        StrongInput.build(fx.square_with_diagonal(), (1, 3))
    with pytest.raises(StartInfeasible):
        run_simplex(fx.square().with_row([1, 1], 1), (0, 2), (1, 0))


def test_revisit_guard_cap():
    with pytest.raises(CycleDetected):
        run_simplex(fx.square(), (0, 2), (1, 1), cap=1)


def test_unbounded_direction():
    S = InequalitySystem([[1, -1], [-1, 0], [0, -1]], [0, 0, 0])
    out = run_simplex(S, (1, 2), (-1, 0))
    assert out.status == "unbounded"
    assert all(dot(a, out.ray) <= 0 for a in S.A) and dot((-1, 0), out.ray) < 0


def _random_polytope(rng):
    while True:
        S = random_system(rng, rng.choice((2, 3)), rng.randint(4, 6))
        try:
            if vertices(S) and is_bounded(S) and check_nondegenerate(S).ok:
                return S
        except Exception:
            continue


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6), st.sampled_from(["bland", "dantzig", "random:1"]))
def test_pivots_strictly_improve_without_revisits(seed, rule):
    rng = random.Random(seed)
    S = _random_polytope(rng)
    c = tuple(F(rng.randint(-5, 5)) for _ in range(S.d))
    U = vertices(S)[0].defining_bases[0].indices
    out = run_simplex(S, U, c, rule)
    values = [dot(c, x) for x in out.path]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert len(set(out.path)) == len(out.path)
    assert out.objective == enumerate_optimum(S, c).objective


# -------------------------------------------------------------------- Phase I

def test_phase_one_feasible_segment():
    eps = F(1, 16)
    P = perturb_with_nonneg(nonneg_system([[1]], [1]), eps)
    ph = phase_one(P)
    assert ph.feasible and ph.outcome.objective == 0
    assert abs(ph.vertex[0]) <= eps ** 2
    assert ph.G.basic_solution(ph.start_basis.indices) == ph.start


def test_phase_one_infeasible():
    P = perturb_with_nonneg(nonneg_system([[1]], [-1]), F(1, 16))
    ph = phase_one(P)
    assert not ph.feasible and ph.outcome.objective > 0


def test_phase_one_needs_nonneg_form():
    from rockforge.perturb import perturb_rhs
    with pytest.raises(InputError):
        phase_one(perturb_rhs(fx.square(), F(1, 4)))


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6))
def test_phase_one_start_is_basic(seed):
    rng = random.Random(seed)
    d, m = rng.randint(1, 3), rng.randint(1, 4)
    A = [[rng.randint(-5, 5) for _ in range(d)] for _ in range(m)]
    A = [r for r in A if any(r)] or [[1] * d]
    b = [rng.randint(-5, 5) for _ in A]
    P = perturb_with_nonneg(nonneg_system(A, b), F(1, 2 ** 10))
    ph = phase_one(P)
    assert ph.G.is_feasible(ph.start)
    assert ph.G.basic_solution(ph.start_basis.indices) == ph.start


# ------------------------------------------------------- alpha interpretation

def test_alpha_basis_one_dimension():
    S = InequalitySystem([[1]], [1])
    _, _, S_aug = box_inequality(S, (0,))
    out = run_simplex(S_aug, (0,), (1,))
    assert out.basis.indices == (1,)
    res = interpret_alpha_basis(out, 1, (1,), S_aug)
    assert res.status == "unbounded" and res.ray == (-1,)
    assert escape_ray(S_aug, (1,), 1) == (-1,)


def test_alpha_never_binds_on_bounded_input():
    S, U, core = fx.augmented_square()
    for c in list(unit_sweep(2)) + [(F(0), F(0))]:
        out = run_simplex(S, U, c)
        res = interpret_alpha_basis(out, 4, c, S)
        assert res.status == "optimal" and 4 not in res.basis.indices


# ------------------------------------------------------------------- solve_lp

def test_solve_lp_examples():
    out = solve_lp([[1, 0], [0, 1]], [1, 1], (-1, -1))
    assert (out.status, out.objective, out.vertex) == ("optimal", -2, (1, 1))
    out = solve_lp([[1, -1]], [0], (-1, 0))
    assert out.status == "unbounded" and out.ray == (1, 1)
    assert solve_lp([[1]], [-1], (1,)).status == "infeasible"


def test_solve_lp_inequality_form():
    out = solve_lp(fx.square().A, fx.square().b, (1, 2), form="inequality")
    assert out.objective == -3 and out.vertex == (-1, -1)
    out = solve_lp([[1, 1]], [1], (1, 1), form="inequality")
    assert out.status == "unbounded" and dot((1, 1), out.ray) < 0 and dot((1, 1), out.ray) <= 0


def test_solve_lp_certified_mode():
    out = solve_lp([[1, 0], [0, 1]], [1, 1], (-1, -1), eps_mode="certified")
    assert out.objective == -2 and out.info["provenance"] == "certified"


def test_solve_lp_prism_route():
    out = solve_lp([[1, 0], [0, 1]], [1, 1], (-1, -1), via="prism")
    assert out.objective == -2 and out.vertex == (1, 1)
    assert solve_lp([[1, -1]], [0], (-1, 0), via="prism").status == "unbounded"


@settings(max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_solve_lp_matches_oracle(seed):
    rng = random.Random(seed)
    d, m = rng.randint(1, 3), rng.randint(1, 5)
    A = [[rng.randint(-5, 5) for _ in range(d)] for _ in range(m)]
    A = [r for r in A if any(r)] or [[1] * d]
    b = [rng.randint(-5, 5) for _ in A]
    c = tuple(F(rng.randint(-5, 5)) for _ in range(d))
    out = solve_lp(A, b, c, eps_mode="adaptive")
    ref = enumerate_optimum(nonneg_system(A, b), c)
    assert (out.status, out.objective) == (ref.status, ref.objective)
    if out.status == "unbounded":
        assert all(dot(a, out.ray) <= 0 for a in A) and min(out.ray) >= 0 and dot(c, out.ray) < 0


# ------------------------------------------------------------------ walk_rock

def test_walk_rock_sweep_augmented_square():
    R = rock("augmented_square").extension
    prism = crooked_prism(R)
    for c in unit_sweep(2):
        c_hat, _ = lift_objective(R, c, "practical", prism)
        target = enumerate_optimum(R.base_system, c).objective
        for rule in ("bland", "dantzig"):
            for v in vertices(R.base_system):
                w = walk_rock(prism, c, v.point, rule, c_hat=c_hat)
                assert dot(c, w.endpoint[:2]) == target
                assert w.bound == 9 and w.within_bound == (w.steps <= 9)


def test_walk_from_the_optimal_lift_takes_no_steps():
    R = rock("augmented_square").extension
    prism = crooked_prism(R)
    c = (F(1), F(0))
    c_hat, _ = lift_objective(R, c, "practical", prism)
    best = min(vertices(R.base_system), key=lambda v: dot(c, v.point)).point
    top = lifts(best + (F(0),))[1]
    Qh = prism.Qhat_system
    U = tuple(i for i in range(Qh.m) if Qh.slack(i, top) == 0)
    obj = _effective(c_hat, 2, "min")
    assert run_simplex(Qh, U, tuple(-v for v in obj)).steps == 0
    w = walk_rock(prism, c, best, c_hat=c_hat)
    assert w.endpoint == top


def test_walk_rock_rejects_non_vertices():
    prism = crooked_prism(rock("augmented_square").extension)
    with pytest.raises(NotAVertex):
        walk_rock(prism, (1, 0), (F(0), F(0)))
