"""Exact rational linear algebra.

Everything here works on ``fractions.Fraction`` values. Vectors are tuples of
fractions and matrices are tuples of row tuples, so all values are immutable
and hashable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt, lcm
from numbers import Rational as _RationalABC
from typing import TYPE_CHECKING, Iterable, Sequence, Union

from .errors import InputError, SingularMatrix, ZeroConstantTerm

if TYPE_CHECKING:
    from .system import InequalitySystem

Vector = tuple[Fraction, ...]
Matrix = tuple[Vector, ...]
RationalLike = Union[int, Fraction, str]


def frac(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InputError("booleans are not rationals")
    if isinstance(x, (int, _RationalABC, str)):
        return Fraction(x)
    raise InputError(f"not an exact rational: {x!r}")


def vec(xs: Iterable[RationalLike]) -> Vector:
    return tuple(frac(x) for x in xs)


def mat(rows: Iterable[Iterable[RationalLike]]) -> Matrix:
    return tuple(vec(r) for r in rows)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def norm1(v: Sequence[Fraction]) -> Fraction:
    return sum((abs(x) for x in v), Fraction(0))


def norm2_sq(v: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(x - y for x, y in zip(u, v))


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(x + y for x, y in zip(u, v))


def scale(t: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(t * x for x in v)


def transpose(M: Sequence[Sequence[Fraction]]) -> Matrix:
    return tuple(zip(*M)) if M else ()


def matmul(M: Sequence[Sequence[Fraction]], N: Sequence[Sequence[Fraction]]) -> Matrix:
    cols = transpose(N)
    return tuple(tuple(dot(r, c) for c in cols) for r in M)


def matvec(M: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector:
    return tuple(dot(r, v) for r in M)


# ---------------------------------------------------------------- encoding size

def _int_size(z: int) -> int:
    # ceil(log2(|z|+1)) == |z|.bit_length()
    return 1 + abs(z).bit_length()


def encoding_size(x) -> int:
    """Bit size of a rational, a (nested) sequence of rationals, or a system.

    Integers cost ``1 + ceil(log2(|z|+1))``; a non-integral ``p/q`` costs
    ``size(p) + size(q)``; containers cost the sum over their entries.
    """
    if hasattr(x, "A") and hasattr(x, "b"):
        return encoding_size(x.A) + encoding_size(x.b)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        f = Fraction(x)
        if f.denominator == 1:
            return _int_size(f.numerator)
        return _int_size(f.numerator) + _int_size(f.denominator)
    return sum(encoding_size(e) for e in x)


@dataclass
class EncodingStats:
    """Encoding size and max entry of a system, with cached powers 2^(k*size)."""

    total_size: int
    delta1: Fraction
    two_pow_cache: dict[int, int] = field(default_factory=dict, repr=False)

    def two_pow(self, k: int) -> int:
        if k not in self.two_pow_cache:
            self.two_pow_cache[k] = 1 << (k * self.total_size)
        return self.two_pow_cache[k]


def encoding_stats(S: "InequalitySystem") -> EncodingStats:
    entries = [abs(v) for row in S.A for v in row] + [abs(v) for v in S.b]
    return EncodingStats(encoding_size(S), max(entries))


# ------------------------------------------------------------------ elimination

def _integer_rows(M: Sequence[Sequence[Fraction]]) -> tuple[list[list[int]], int]:
    rows, factor = [], 1
    for row in M:
        den = lcm(*(f.denominator for f in row)) if row else 1
        rows.append([f.numerator * (den // f.denominator) for f in row])
        factor *= den
    return rows, factor


def int_det(rows: list[list[int]]) -> int:
    """Determinant of an integer matrix by Bareiss elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            aik = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def det(M: Sequence[Sequence[RationalLike]]) -> Fraction:
    M = mat(M)
    n = len(M)
    if any(len(r) != n for r in M):
        raise InputError("det needs a square matrix")
    a, factor = _integer_rows(M)
    return Fraction(int_det(a), factor)


def int_cross(rows: list[list[int]]) -> list[int]:
    """Generalized cross product of n-1 integer rows in Z^n.

    The result is orthogonal to every row and is zero iff the rows are
    linearly dependent.
    """
    n = len(rows) + 1
    out = []
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows]
        v = int_det(minor)
        out.append(-v if j % 2 else v)
    return out


def _solve_columns(M: Matrix, cols: list[Vector]) -> list[Vector]:
    n = len(M)
    if any(len(r) != n for r in M):
        raise InputError("solve_square needs a square matrix")
    rows = [list(M[i]) + [c[i] for c in cols] for i in range(n)]
    ints, _ = _integer_rows(rows)
    nums, den = solve_int(ints, n)
    return [tuple(Fraction(nums[i][j], den) for i in range(n)) for j in range(len(cols))]


def solve_int(aug: list[list[int]], n: int) -> tuple[list[list[int]], int]:
    """Fraction-free Gauss-Jordan on an integer augmented matrix [M | R].

    Returns (N, den) with den > 0 and M^{-1} R = N / den. Every division is
    exact, so no gcd is ever taken.
    """
    a = [list(r) for r in aug]
    width = len(a[0]) if a else n
    prev = 1
    sign = 1
    for k in range(n):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                raise SingularMatrix("matrix is singular")
        p = a[k][k]
        rk = a[k]
        for i in range(n):
            if i == k:
                continue
            ri = a[i]
            f = ri[k]
            for j in range(width):
                if j != k:
                    ri[j] = (p * ri[j] - f * rk[j]) // prev
            ri[k] = 0
        prev = p
    den = a[0][0] if n else 1
    nums = [r[n:] for r in a]
    if den < 0:
        den = -den
        nums = [[-v for v in r] for r in nums]
    return nums, den


def int_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    a = [list(r) for r in rows if any(r)]
    if not a:
        return 0
    width = len(a[0])
    r, prev = 0, 1
    for c in range(width):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, len(a)):
            f = a[i][c]
            a[i] = [(p * x - f * y) // prev for x, y in zip(a[i], a[r])]
        prev = p
        r += 1
        if r == len(a):
            break
    return r


def integer_rows(M: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Each row multiplied by the lcm of its denominators."""
    return _integer_rows(M)[0]


def solve_square(M, rhs):
    """Solve M x = rhs exactly. ``rhs`` may be a vector or a matrix."""
    M = mat(M)
    if rhs and isinstance(rhs[0], (list, tuple)):
        R = mat(rhs)
        return transpose(_solve_columns(M, list(transpose(R))))
    return _solve_columns(M, [vec(rhs)])[0]


def inverse(M) -> Matrix:
    M = mat(M)
    n = len(M)
    eye = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    return transpose(_solve_columns(M, eye))


def row_echelon(M: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = [list(r) for r in M]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [v / p for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(M: Sequence[Sequence[Fraction]]) -> int:
    if not M:
        return 0
    return int_rank(_integer_rows(M)[0])


def nullspace(M: Sequence[Sequence[Fraction]], n: int) -> list[Vector]:
    """Basis of {x in Q^n : M x = 0}."""
    if not M:
        return [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
    R, pivots = row_echelon(M)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -R[i][f]
        basis.append(tuple(x))
    return basis


def primitive(v: Sequence[Fraction]) -> Vector:
    """Positive multiple of ``v`` with coprime integer entries."""
    from math import gcd

    den = lcm(*(f.denominator for f in v))
    ints = [f.numerator * (den // f.denominator) for f in v]
    g = 0
    for z in ints:
        g = gcd(g, z)
    if g == 0:
        return tuple(Fraction(0) for _ in v)
    return tuple(Fraction(z // g) for z in ints)


# ------------------------------------------------------------- misc arithmetic

def ceil_sqrt(x: Fraction) -> int:
    """Smallest integer n >= 0 with n*n >= x."""
    x = frac(x)
    if x <= 0:
        return 0
    c = -((-x.numerator) // x.denominator)
    n = isqrt(c)
    return n if n * n >= c else n + 1


def cauchy_root_bound(coeffs: Sequence[RationalLike]) -> Fraction:
    """Return ``1/delta`` with ``delta = 1 + max_k |a_k / a_0|``.

    Coefficients are given constant term first. No nonzero root of the
    polynomial is smaller than the bound in absolute value.
    """
    cs = vec(coeffs)
    if not cs or cs[0] == 0:
        raise ZeroConstantTerm("constant term must be nonzero")
    a0 = cs[0]
    delta = 1 + max((abs(a / a0) for a in cs[1:]), default=Fraction(0))
    return 1 / delta


def scale_to_integrality(S: "InequalitySystem") -> tuple["InequalitySystem", tuple[int, ...]]:
    """Multiply each row by the lcm of its denominators."""
    from .system import InequalitySystem

    rows, rhs, factors = [], [], []
    for Ai, bi in zip(S.A, S.b):
        f = lcm(*(x.denominator for x in Ai), bi.denominator)
        rows.append(tuple(x * f for x in Ai))
        rhs.append(bi * f)
        factors.append(f)
    return InequalitySystem(tuple(rows), tuple(rhs), S.labels), tuple(factors)
