"""Small standard polytopes used by the tests, the acceptance suite and the CLI docs."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional

from .construct import box_inequality, first_vertex_basis
from .exact import scale_to_integrality
from .system import InequalitySystem


def square() -> InequalitySystem:
    return InequalitySystem([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1, 1, 1],
                            ("x<=1", "-x<=1", "y<=1", "-y<=1"))


def triangle() -> InequalitySystem:
    return InequalitySystem([[-1, 0], [0, -1], [1, 1]], [0, 0, 1])


def segment() -> InequalitySystem:
    return InequalitySystem([[1], [-1]], [1, 1])


def square_with_diagonal() -> InequalitySystem:
    return InequalitySystem([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]], [1, 1, 1, 1, 2])


def square_pyramid() -> InequalitySystem:
    return InequalitySystem([[0, 0, -1], [1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1]], [0, 1, 1, 1, 1])


def octahedron() -> InequalitySystem:
    rows = [[sx, sy, sz] for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    return InequalitySystem(rows, [1] * 8)


def cube() -> InequalitySystem:
    rows = []
    for j in range(3):
        for s in (1, -1):
            r = [0, 0, 0]
            r[j] = s
            rows.append(r)
    return InequalitySystem(rows, [1] * 6)


def truncated_cube() -> InequalitySystem:
    """Unit cube [-1,1]^3 with the corner (1,1,1) cut off: 7 facets, simple."""
    c = cube()
    return c.with_row([1, 1, 1], Fraction(5, 2))


def simplex3() -> InequalitySystem:
    return InequalitySystem([[-1, 0, 0], [0, -1, 0], [0, 0, -1], [1, 1, 1]], [0, 0, 0, 1])


def polygon(n: int, offset: float = 0.1, max_den: int = 16) -> InequalitySystem:
    """An n-gon circumscribed about the unit circle with rational unit normals.

    Three tangent lines of a circle are never concurrent, so the system is
    non-degenerate. Normals come from rational points of the unit circle.
    """
    ts = []
    den = max_den
    while True:
        ts = []
        for k in range(n):
            theta = 2 * math.pi * k / n + offset - math.pi
            ts.append(Fraction(math.tan(theta / 2)).limit_denominator(den))
        if len(set(ts)) == n:
            break
        den *= 2
    rows, rhs = [], []
    for t in ts:
        q = 1 + t * t
        rows.append([(1 - t * t) / q, 2 * t / q])
        rhs.append(1)
    S, _ = scale_to_integrality(InequalitySystem(rows, rhs))
    return S


def augment(S: InequalitySystem, U: Optional[tuple[int, ...]] = None):
    """Add the box row at a vertex. Returns (system, vertex basis, core rows)."""
    S, _ = scale_to_integrality(S)
    U = U or first_vertex_basis(S)
    _, _, S_aug = box_inequality(S, U)
    return S_aug, tuple(U), tuple(sorted(U)) + (S_aug.m - 1,)


def augmented_square():
    return augment(square(), (0, 2))
