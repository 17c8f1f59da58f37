from fractions import Fraction as F
from itertools import permutations
from math import gcd

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rockforge.errors import InputError, SingularMatrix, ZeroConstantTerm
from rockforge.exact import (
    cauchy_root_bound,
    ceil_sqrt,
    det,
    encoding_size,
    frac,
    int_cross,
    int_det,
    inverse,
    matmul,
    matvec,
    nullspace,
    primitive,
    rank,
    scale_to_integrality,
    solve_int,
    solve_square,
)
from rockforge.fixtures import square
from rockforge.system import InequalitySystem

small = st.integers(-6, 6)
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def square_matrix(n, elems=small):
    return st.lists(st.lists(elems, min_size=n, max_size=n), min_size=n, max_size=n)


def leibniz(M):
    """Permutation-sum determinant, an oracle independent of elimination."""
    n = len(M)
    total = F(0)
    for p in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        term = F(-1 if inv % 2 else 1)
        for i in range(n):
            term *= F(M[i][p[i]])
        total += term
    return total


# ------------------------------------------------------------ determinants

def test_det_examples():
    assert det([[2, 0], [0, 3]]) == 6
    assert det([[1, 2], [3, 4]]) == -2
    assert det([[1, 2], [2, 4]]) == 0
    assert det([[F(1, 2), F(1, 3)], [F(1, 4), F(1, 5)]]) == F(1, 10) - F(1, 12)


def test_det_rejects_non_square():
    with pytest.raises(InputError):
        det([[1, 2, 3], [4, 5, 6]])


@given(st.integers(1, 5).flatmap(square_matrix))
def test_det_matches_leibniz(M):
    assert det(M) == leibniz(M)
    assert int_det(M) == leibniz(M)


@given(square_matrix(3), square_matrix(3))
def test_det_multiplicative(M, N):
    Mf = [[F(v) for v in r] for r in M]
    Nf = [[F(v) for v in r] for r in N]
    assert det(matmul(Mf, Nf)) == det(M) * det(N)


@given(square_matrix(3, rationals))
def test_det_rational_matches_leibniz(M):
    assert det(M) == leibniz(M)


# ----------------------------------------------------------------- solving

def test_solve_square_examples():
    assert solve_square([[1, 0], [0, 1]], [F(3), F(-2)]) == (3, -2)
    assert solve_square([[1, 1], [1, -1]], [1, 0]) == (F(1, 2), F(1, 2))
    with pytest.raises(SingularMatrix):
        solve_square([[1, 2], [2, 4]], [1, 1])


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(square_matrix(n, rationals),
                                                      st.lists(rationals, min_size=n, max_size=n))))
def test_solve_square_round_trip(data):
    M, rhs = data
    if det(M) == 0:
        with pytest.raises(SingularMatrix):
            solve_square(M, rhs)
        return
    x = solve_square(M, rhs)
    Mf = [[F(v) for v in r] for r in M]
    assert matvec(Mf, x) == tuple(F(v) for v in rhs)


@given(square_matrix(3))
def test_solve_square_matrix_rhs_is_inverse(M):
    if det(M) == 0:
        return
    Mf = [[F(v) for v in r] for r in M]
    eye = tuple(tuple(F(int(i == j)) for j in range(3)) for i in range(3))
    assert matmul(Mf, inverse(Mf)) == eye
    assert solve_square(Mf, eye) == inverse(Mf)


@given(square_matrix(3), st.lists(small, min_size=3, max_size=3))
def test_solve_int_is_cramer(M, rhs):
    d = leibniz(M)
    if d == 0:
        return
    aug = [list(r) + [v] for r, v in zip(M, rhs)]
    nums, den = solve_int(aug, 3)
    assert den > 0
    for j in range(3):
        Mj = [r[:j] + [v] + r[j + 1:] for r, v in zip(M, rhs)]
        assert F(nums[j][0], den) == leibniz(Mj) / d


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=2, max_size=2))
def test_int_cross_is_orthogonal(rows):
    r = int_cross(rows)
    for a in rows:
        assert sum(x * y for x, y in zip(a, r)) == 0
    assert any(r) == (rank([[F(v) for v in row] for row in rows]) == 2)


# -------------------------------------------------------------- rank, kernel

def test_rank_examples():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[1, 0], [0, 1], [1, 1]]) == 2
    assert rank([[0, 0]]) == 0


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=1, max_size=5))
def test_rank_nullity(M):
    Mf = [[F(v) for v in r] for r in M]
    N = nullspace(Mf, 4)
    assert rank(Mf) + len(N) == 4
    for n in N:
        assert matvec(Mf, n) == (0,) * len(M)


def test_primitive():
    assert primitive([F(2, 3), F(4, 3)]) == (1, 2)
    assert primitive([F(-6), F(9)]) == (-2, 3)
    assert primitive([F(0), F(0)]) == (0, 0)


# --------------------------------------------------------------- encoding

def test_encoding_size_convention():
    assert encoding_size(0) == 1
    assert encoding_size(1) == 2
    assert encoding_size(-1) == 2
    assert encoding_size(4) == 4
    assert encoding_size(F(3, 4)) == 3 + 4
    assert encoding_size([1, [0, -1]]) == 2 + 1 + 2


def test_encoding_size_square_is_20():
    # eight entries of +-1 or 0 in A and four 1s in b
    assert encoding_size(square()) == 20


@given(st.lists(st.lists(small, min_size=2, max_size=2), min_size=1, max_size=4),
       st.lists(st.lists(small, min_size=2, max_size=2), min_size=1, max_size=3))
def test_encoding_size_monotone_in_rows(A, extra):
    A = [r for r in A if any(r)] or [[1, 0]]
    extra = [r for r in extra if any(r)] or [[0, 1]]
    S = InequalitySystem(A, [1] * len(A))
    T = InequalitySystem(A + extra, [1] * (len(A) + len(extra)))
    assert encoding_size(T) >= encoding_size(S)


# -------------------------------------------------------- canonical forms

@given(st.lists(st.tuples(st.sampled_from("+-*/"), rationals), min_size=1, max_size=60))
def test_arithmetic_stays_canonical(ops):
    x = F(1)
    for op, y in ops:
        if op == "+":
            x += y
        elif op == "-":
            x -= y
        elif op == "*":
            x *= y
        elif y != 0:
            x /= y
        assert x.denominator > 0
        assert gcd(x.numerator, x.denominator) == 1


def test_frac_rejects_floats_and_bools():
    assert frac("3/6") == F(1, 2)
    with pytest.raises(InputError):
        frac(0.5)
    with pytest.raises(InputError):
        frac(True)


# ---------------------------------------------------------- scaling, sqrt

def test_scale_to_integrality():
    S = InequalitySystem([[F(1, 2), F(1, 3)], [1, 0]], [F(1, 6), 2])
    T, factors = scale_to_integrality(S)
    assert T.A[0] == (3, 2) and T.b[0] == 1
    assert T.A[1] == (1, 0) and T.b[1] == 2
    assert factors == (6, 1)
    U, f = scale_to_integrality(square())
    assert U == square() and f == (1, 1, 1, 1)


@given(st.fractions(min_value=0, max_value=10 ** 6, max_denominator=50))
def test_ceil_sqrt(x):
    n = ceil_sqrt(x)
    assert n * n >= x
    assert n == 0 or (n - 1) ** 2 < x


# ---------------------------------------------------------------- cauchy

def test_cauchy_examples():
    assert cauchy_root_bound([-2, 1]) == F(2, 3)
    assert cauchy_root_bound([1, -3, 2]) == F(1, 4)
    assert cauchy_root_bound([5]) == 1
    with pytest.raises(ZeroConstantTerm):
        cauchy_root_bound([0, 1])


@given(st.lists(st.integers(-9, 9), min_size=1, max_size=5).filter(lambda c: c[0] != 0),
       st.lists(st.integers(-999, 999), min_size=50, max_size=50))
def test_cauchy_sign_preserved(coeffs, samples):
    bound = cauchy_root_bound(coeffs)
    for k in samples:
        # points strictly inside (-bound, bound)
        x = bound * F(k, 1000)
        value = sum(F(a) * x ** i for i, a in enumerate(coeffs))
        assert (value > 0) == (coeffs[0] > 0)
