from dataclasses import replace
from fractions import Fraction as F

import pytest

from rockforge import fixtures as fx
from rockforge.construct import (
    a_hat,
    batch_schedule_2d,
    batch_schedule_3d,
    box_inequality,
    build_rock,
    certified_c_y,
    check_sandwich,
    compute_params,
    crooked_prism,
    interior_point,
    lift_objective,
    lifts,
    monotone_path,
    recenter,
    rock_extension,
    rock_extension_batched,
    rock_from_q,
    verify_monotone_paths,
)
from rockforge.errors import (
    NonPositiveCoefficient,
    NonPositiveRHS,
    NotAVertex,
    NotInterior,
    ScheduleInvalid,
    SimplexCoreInvalid,
)
from rockforge.exact import dot, encoding_size, scale_to_integrality
from rockforge.polytope import (
    build_graph,
    check_nondegenerate,
    check_simplicity,
    find_simplex_subsystem,
    irredundant_rows,
    vertices,
)
from rockforge.system import InequalitySystem
from suite import rock, rock_checks, unit_sweep


def centered_triangle():
    S, _ = recenter(fx.triangle(), (F(1, 4), F(1, 4)))
    return S


# -------------------------------------------------------------- augmentation

def test_interior_point_square():
    # <A,b> = 20, lambda = 1/2 (2^40 * 2 * 1)^-1 = 2^-42, step along (-1,-1)/2
    o = interior_point(fx.square(), (0, 2))
    assert o == (1 - F(1, 2 ** 43), 1 - F(1, 2 ** 43))


def test_interior_point_triangle():
    # <A,b> = 14, lambda = 1/2 (2^28 * 2 * 1)^-1 = 2^-30, s = (1,1)
    o = interior_point(fx.triangle(), (0, 1))
    assert o == (F(1, 2 ** 31), F(1, 2 ** 31))


def test_interior_point_rejects_non_vertices():
    with pytest.raises(NotAVertex):
        interior_point(fx.square(), (0, 1))
    with pytest.raises(NotAVertex):
        interior_point(fx.square_with_diagonal().with_row([1, 0], F(1, 2)), (0, 2))


def test_box_inequality_square():
    alpha, beta, S_aug = box_inequality(fx.square(), (0, 2))
    assert alpha == (-1, -1)
    assert beta == 2 ** 42 + 1
    assert S_aug.m == 5 and check_nondegenerate(S_aug).ok
    assert all(dot(alpha, v.point) in (-2, 0, 2) for v in vertices(fx.square()))
    assert find_simplex_subsystem(S_aug) == (0, 2, 4)


def test_box_inequality_is_redundant_on_triangle():
    _, _, S_aug = box_inequality(fx.triangle(), (0, 1))
    assert S_aug.m == 4
    assert irredundant_rows(S_aug) == (0, 1, 2)


def test_recenter():
    S = centered_triangle()
    assert S.b == (1, 1, 1)
    assert S.A == ((-4, 0), (0, -4), (2, 2))
    T, shift = recenter(fx.square(), (0, 0))
    assert T == fx.square() and shift.factors == (1, 1, 1, 1)
    with pytest.raises(NotInterior):
        recenter(fx.square(), (1, 0))


# ----------------------------------------------------------------- params

def test_compute_params():
    S = centered_triangle()
    cert = compute_params(S, "certified")
    # Delta_1 = 4 and <A,b> = 22 for the centered triangle
    assert encoding_size(S) == 22
    assert cert.D == 25 * 8 * 4 * 2 ** (6 * 22)
    assert cert.eps_initial == F(1, 2 * 4)
    prac = compute_params(S, "practical")
    assert 7 <= prac.D <= cert.D
    with pytest.raises(NonPositiveRHS):
        compute_params(InequalitySystem([[1, 0], [0, 1], [-1, -1]], [1, 0, 1]))


def test_a_hat():
    S = fx.square()
    assert a_hat(S, 0, F(1, 100)) == F(9950, 9999)
    tiny = a_hat(S, 0, F(1, 2 ** 42))
    assert 0 < tiny < 1 and 1 - tiny < F(1, 2 ** 40)
    with pytest.raises(NonPositiveCoefficient):
        a_hat(InequalitySystem([[100, 0], [0, 1]], [1, 1]), 0, F(1, 2))


# ----------------------------------------------------------- rock extension

def test_rock_of_triangle_is_pyramid():
    S = centered_triangle()
    R = rock_extension(S, (0, 1, 2))
    assert R.a == S.b
    assert sorted(v.point for v in vertices(R.Q_system)) == sorted(
        [v.point + (0,) for v in vertices(S)] + [(0, 0, 1)])


def test_rock_rejects_bad_core():
    S, _ = recenter(fx.square(), (0, 0))
    with pytest.raises(SimplexCoreInvalid):
        rock_extension(S, (0, 1, 2))


@pytest.mark.parametrize("name", ["triangle", "augmented_square", "augmented_hexagon"])
def test_rock_properties(name):
    checks = rock_checks(rock(name))
    assert all(ok for ok, _, _ in checks.values()), checks


def test_augmented_square_rock():
    B = rock("augmented_square")
    R = B.extension
    assert R.Q_system.m == 6
    assert B.diameter_bound == 6
    assert R.top == (0, 0, 1)


def test_projection_recovers_base():
    for name in ("augmented_square", "augmented_hexagon", "augmented_truncated_cube"):
        R = rock(name).extension
        floor = {v.point[:-1] for v in vertices(R.Q_system) if v.point[-1] == 0}
        assert floor == {v.point for v in vertices(R.base_system)}


def test_certified_and_practical_both_pass():
    for mode in ("certified", "practical"):
        checks = rock_checks(rock("augmented_square", mode))
        assert all(ok for ok, _, _ in checks.values())
    assert rock("augmented_square", "certified").extension.a != rock("augmented_square").extension.a


def test_sandwich_detects_tampering():
    R = rock("augmented_hexagon").extension
    assert check_sandwich(R).ok
    row = R.params.mu_schedule[0].row
    a = list(R.a)
    a[row] = R.base_system.b[row]
    assert not check_sandwich(replace(R, a=tuple(a))).ok


def test_rock_from_q_round_trip():
    R = rock("augmented_square").extension
    back = rock_from_q(R.Q_system)
    assert back.a == R.a and back.base_system.A == R.base_system.A
    assert back.simplex_core == R.simplex_core


def test_build_rock_uses_existing_core():
    B = build_rock(fx.triangle())
    assert B.box_row is None and B.extension.m == 3
    B = build_rock(fx.square())
    assert B.box_row == 4 and B.extension.m == 5


# ---------------------------------------------------------------- batching

def test_batch_schedule_hexagon():
    B = rock("augmented_hexagon", batched=True)
    assert B.schedule.batches and len(B.schedule.batches[0]) == 2
    assert check_sandwich(B.extension).ok


def test_batch_schedule_base_cases():
    R = rock("augmented_square").extension
    assert batch_schedule_2d(R.base_system, R.simplex_core).batches == ()
    T = centered_triangle()
    assert batch_schedule_2d(T.with_row([0, 1], 1), (0, 1, 2)).batches == ()
    simplex, _ = recenter(fx.simplex3(), (F(1, 8),) * 3)
    assert batch_schedule_3d(simplex, (0, 1, 2, 3)).batches == ()


def test_singleton_batches_match_plain_build():
    R = rock("augmented_hexagon").extension
    S, core = R.base_system, R.simplex_core
    order = R.params.order
    plain = rock_extension(S, core, order=order)
    single = rock_extension_batched(S, core, [[r] for r in order])
    assert plain.a == single.a


def test_adjacent_rows_in_one_batch_are_rejected():
    R = rock("augmented_hexagon").extension
    S, core = R.base_system, R.simplex_core
    G = build_graph(S)
    rest = [r for r in range(S.m) if r not in core]
    pair = next((i, j) for v in G.vertices for i in v.tight_rows for j in v.tight_rows
                if i < j and i in rest and j in rest)
    with pytest.raises(ScheduleInvalid):
        rock_extension_batched(S, core, [list(pair)])


def test_batch_schedule_3d_truncated_cube():
    B = rock("augmented_truncated_cube", batched=True)
    assert B.schedule.batches
    assert all(ok for ok, _, _ in rock_checks(B).values())


# ------------------------------------------------------------------- prism

def test_prism_over_segment():
    S = fx.segment()
    P = crooked_prism(rock_extension(S, (0, 1)))
    Qh = P.Qhat_system
    assert Qh.m == 5 and len(vertices(Qh)) == 6
    assert check_simplicity(Qh).ok


def test_prism_over_triangle_pyramid():
    R = rock_extension(centered_triangle(), (0, 1, 2))
    P = crooked_prism(R)
    assert P.Qhat_system.m == R.Q_system.m + 2
    rep = check_simplicity(P.Qhat_system)
    assert rep.ok and len(rep.details["irredundant_rows"]) == 6


def test_prism_lifts_and_top_edge():
    R = rock("augmented_square").extension
    P = crooked_prism(R)
    G = build_graph(P.Qhat_system)
    for v in vertices(R.Q_system):
        lo, hi = lifts(v.point)
        G.index_of(lo)
        G.index_of(hi)
    t0, t1 = (G.index_of(p) for p in lifts(R.top))
    assert t1 in G.adjacency[t0]


def test_lift_objective():
    R = rock("augmented_square").extension
    assert lift_objective(R, (0, 0))[0] == (0, 0, 0, 1)
    c = (F(1, 2), 0)
    c_hat, c_y = lift_objective(R, c, "certified")
    rows, _ = scale_to_integrality(InequalitySystem(R.Q_system.A[:-1], R.Q_system.b[:-1]))
    assert c_hat == (1, 0, 0, c_y)
    assert c_y == 6 * 1 * 2 ** (8 * encoding_size(rows)) + 1
    _, practical = lift_objective(R, c, "practical")
    assert practical <= certified_c_y(R, (1, 0))


def test_monotone_paths_on_augmented_square():
    R = rock("augmented_square").extension
    P = crooked_prism(R)
    for c in unit_sweep(2):
        c_hat, _ = lift_objective(R, c, "practical", P)
        rep = verify_monotone_paths(P, c_hat)
        assert rep.ok and max(rep.details["lengths"].values()) <= 9


def test_monotone_path_from_an_optimal_start_still_climbs():
    R = rock("augmented_square").extension
    P = crooked_prism(R)
    c = (F(1), F(0))
    c_hat, _ = lift_objective(R, c, "practical", P)
    best = min(vertices(R.base_system), key=lambda v: dot(c, v.point)).point
    path = monotone_path(P, c_hat, best)
    assert len(path) >= 2
    assert path[-1][:2] == best
