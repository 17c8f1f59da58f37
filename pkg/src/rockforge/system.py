"""Core value types shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from .errors import InputError, SingularMatrix
from .exact import Matrix, Vector, dot, mat, solve_square, vec


@dataclass(frozen=True)
class InequalitySystem:
    """The system ``A x <= b`` with exact rational data."""

    A: Matrix
    b: Vector
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        A = mat(self.A)
        b = vec(self.b)
        if len(A) == 0:
            raise InputError("a system needs at least one row")
        d = len(A[0])
        if d == 0:
            raise InputError("dimension must be at least 1")
        if any(len(r) != d for r in A):
            raise InputError("ragged constraint matrix")
        if len(b) != len(A):
            raise InputError("row count of A and b differ")
        for i, r in enumerate(A):
            if all(v == 0 for v in r):
                raise InputError(f"row {i} of A is zero")
        labels = self.labels
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != len(A):
                raise InputError("label count differs from row count")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def d(self) -> int:
        return len(self.A[0])

    def slack(self, i: int, x: Sequence[Fraction]) -> Fraction:
        return self.b[i] - dot(self.A[i], x)

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        return all(dot(a, x) <= bi for a, bi in zip(self.A, self.b))

    def is_strictly_feasible(self, x: Sequence[Fraction]) -> bool:
        return all(dot(a, x) < bi for a, bi in zip(self.A, self.b))

    def tight_rows(self, x: Sequence[Fraction]) -> frozenset[int]:
        return frozenset(i for i, (a, bi) in enumerate(zip(self.A, self.b)) if dot(a, x) == bi)

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for r in self.A for v in r) and all(v.denominator == 1 for v in self.b)

    def subsystem(self, rows: Iterable[int]) -> "InequalitySystem":
        rows = list(rows)
        labels = tuple(self.labels[i] for i in rows) if self.labels else None
        return InequalitySystem(tuple(self.A[i] for i in rows), tuple(self.b[i] for i in rows), labels)

    def with_row(self, a: Sequence, beta, label: Optional[str] = None) -> "InequalitySystem":
        labels = None
        if self.labels is not None:
            labels = self.labels + (label or f"row{self.m}",)
        return InequalitySystem(self.A + (vec(a),), self.b + (Fraction(beta),), labels)

    def with_rhs(self, b: Sequence) -> "InequalitySystem":
        return InequalitySystem(self.A, vec(b), self.labels)

    def basic_solution(self, basis: Iterable[int]) -> Vector:
        idx = list(basis)
        return solve_square([self.A[i] for i in idx], [self.b[i] for i in idx])


@dataclass(frozen=True, order=True)
class Basis:
    """A sorted set of d row indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in self.indices)))

    @classmethod
    def checked(cls, S: InequalitySystem, indices: Iterable[int]) -> "Basis":
        B = cls(tuple(indices))
        if len(B.indices) != S.d or len(set(B.indices)) != S.d:
            raise InputError(f"a basis needs {S.d} distinct rows")
        if any(i < 0 or i >= S.m for i in B.indices):
            raise InputError("basis index out of range")
        try:
            S.basic_solution(B.indices)
        except SingularMatrix:
            raise SingularMatrix(f"rows {B.indices} are linearly dependent") from None
        return B

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices


def as_indices(U) -> tuple[int, ...]:
    if isinstance(U, Basis):
        return U.indices
    return tuple(sorted(int(i) for i in U))


@dataclass
class CheckReport:
    """Outcome of a property check; ``witnesses`` explain any failure."""

    ok: bool
    witnesses: list = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class SolveOutcome:
    status: str  # "optimal", "unbounded" or "infeasible"
    basis: Optional[Basis] = None
    vertex: Optional[Vector] = None
    objective: Optional[Fraction] = None
    steps: int = 0
    ray: Optional[Vector] = None
    path: tuple[Vector, ...] = ()
    info: dict = field(default_factory=dict, compare=False)
