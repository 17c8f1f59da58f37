"""Right-hand-side perturbation b + (eps, eps^2, ..., eps^m) and its checks."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .errors import InputError, NotFound, RankDeficient, RowsNotIdentified, SingularMatrix, TransferInfeasible
from .exact import (
    Vector,
    dot,
    encoding_size,
    int_det,
    integer_rows,
    norm1,
    rank,
    scale_to_integrality,
    solve_square,
    vec,
)
from .polytope import basic_solutions, check_nondegenerate, enumerate_optimum
from .system import Basis, CheckReport, InequalitySystem

ADAPTIVE_CAP = 512


@dataclass(frozen=True)
class PerturbedSystem:
    """``original`` and ``perturbed`` share A and row order; only the RHS moves.

    ``row_map[k]`` is the input row that became row k. ``scaled`` is the
    perturbed system with each row scaled to integrality by ``factors``.
    """

    original: InequalitySystem
    epsilon: Fraction
    b_eps: Vector
    perturbed: InequalitySystem
    scaled: InequalitySystem
    factors: tuple[int, ...]
    provenance: str
    row_map: tuple[int, ...]
    nonneg_rows: tuple[int, ...] = ()

    @property
    def certified(self) -> bool:
        return self.provenance == "certified"


def _int_c(c: Sequence) -> Vector:
    c = vec(c)
    if any(v.denominator != 1 for v in c):
        raise InputError("objective must be integral")
    return c


def _bound(d: int, c: Vector, size: int) -> Fraction:
    n1 = norm1(c) or Fraction(1)
    return 1 / (3 * d * n1 * (1 << (5 * size)))


def epsilon_bound(S: InequalitySystem, c: Sequence) -> Fraction:
    """The certified perturbation size for the integral system S and objective c."""
    if not S.is_integral():
        raise InputError("system must be integral")
    c = _int_c(c)
    return _bound(S.d, c, encoding_size(S))


def identity_block_size(d: int) -> int:
    """Encoding size of the block -x <= 0 in d variables."""
    return encoding_size([[-int(i == j) for j in range(d)] for i in range(d)]) + encoding_size([0] * d)


def nonneg_epsilon_bound(S: InequalitySystem, c: Sequence) -> Fraction:
    """Certified size for {Ax <= b, x >= 0}; S holds only the Ax <= b rows."""
    if not S.is_integral():
        raise InputError("system must be integral")
    c = _int_c(c)
    return _bound(S.d, c, encoding_size(S) + identity_block_size(S.d))


def _finish(original: InequalitySystem, eps: Fraction, b_eps: Vector, provenance: str,
            row_map, nonneg_rows=()) -> PerturbedSystem:
    if eps <= 0:
        raise InputError("epsilon must be positive")
    pert = original.with_rhs(tuple(bi + e for bi, e in zip(original.b, b_eps)))
    scaled, factors = scale_to_integrality(pert)
    return PerturbedSystem(original, eps, b_eps, pert, scaled, factors, provenance,
                           tuple(row_map), tuple(nonneg_rows))


def perturb_rhs(S: InequalitySystem, epsilon, provenance: str = "manual") -> PerturbedSystem:
    eps = Fraction(epsilon)
    if eps <= 0:
        raise InputError("epsilon must be positive")
    b_eps = tuple(eps ** (i + 1) for i in range(S.m))
    return _finish(S, eps, b_eps, provenance, range(S.m))


def split_nonneg(S: InequalitySystem) -> tuple[list[int], list[int]]:
    """Indices of the main rows and of the rows -x_j <= 0 (one per j, in j order)."""
    d = S.d
    found: dict[int, int] = {}
    for i, (row, bi) in enumerate(zip(S.A, S.b)):
        if bi != 0:
            continue
        nz = [j for j, v in enumerate(row) if v != 0]
        if len(nz) == 1 and row[nz[0]] < 0 and nz[0] not in found:
            found[nz[0]] = i
    missing = [j for j in range(d) if j not in found]
    if missing:
        raise RowsNotIdentified(f"no row -x_j <= 0 for j in {missing}", missing)
    nonneg = [found[j] for j in range(d)]
    main = [i for i in range(S.m) if i not in set(nonneg)]
    return main, nonneg


def perturb_with_nonneg(S: InequalitySystem, epsilon, provenance: str = "manual") -> PerturbedSystem:
    """Perturb Ax <= b by eps^i and the rows -x_j <= 0 by eps^(m+j).

    The rows are reordered so the main rows come first, then -x_1..-x_d.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise InputError("epsilon must be positive")
    main, nonneg = split_nonneg(S)
    order = main + nonneg
    # normalise the sign rows to exactly -e_j
    rows = [S.A[i] for i in main] + [tuple(Fraction(-int(k == j)) for k in range(S.d)) for j in range(S.d)]
    rhs = [S.b[i] for i in main] + [Fraction(0)] * S.d
    labels = tuple(S.labels[i] for i in order) if S.labels else None
    original = InequalitySystem(tuple(rows), tuple(rhs), labels)
    b_eps = tuple(eps ** (k + 1) for k in range(len(order)))
    m = len(main)
    return _finish(original, eps, b_eps, provenance, order, range(m, m + S.d))


def main_rows(S: InequalitySystem) -> InequalitySystem:
    main, _ = split_nonneg(S)
    return S.subsystem(main)


@dataclass(frozen=True)
class Transfer:
    basis: Basis
    vertex: Vector
    perturbed_vertex: Vector


def transfer_basis(U, P: PerturbedSystem) -> Transfer:
    """Map a feasible basis of the perturbed system to a vertex of the original."""
    U = Basis(U)
    idx = U.indices
    A_U = [P.original.A[i] for i in idx]
    try:
        xe = solve_square(A_U, [P.perturbed.b[i] for i in idx])
        x = solve_square(A_U, [P.original.b[i] for i in idx])
    except SingularMatrix:
        raise SingularMatrix(f"basis {idx} is singular") from None
    if not P.perturbed.is_feasible(xe):
        raise InputError(f"basis {idx} is not feasible for the perturbed system")
    if not P.original.is_feasible(x):
        raise TransferInfeasible(f"basis {idx} does not give a vertex of the original system",
                                 [tuple(str(v) for v in x)])
    return Transfer(U, x, xe)


# ------------------------------------------------------------------ verifier

def _pairs(P: PerturbedSystem):
    """Basic solutions of every nonsingular basis, unperturbed and perturbed."""
    A, b, be = P.original.A, P.original.b, P.perturbed.b
    out = []
    for U in combinations(range(P.original.m), P.original.d):
        A_U = [A[i] for i in U]
        try:
            X = solve_square(A_U, [(b[i], be[i]) for i in U])
        except SingularMatrix:
            continue
        out.append((U, tuple(r[0] for r in X), tuple(r[1] for r in X)))
    return out


def max_subdeterminant(S: InequalitySystem) -> int:
    """Largest |det A_U| over d-row subsets of the integer-scaled rows."""
    rows = integer_rows([tuple(a) + (bi,) for a, bi in zip(S.A, S.b)])
    A = [r[:-1] for r in rows]
    return max((abs(int_det([A[i] for i in U])) for U in combinations(range(S.m), S.d)), default=0)


def verify_perturbation_properties(P: PerturbedSystem, c: Sequence) -> CheckReport:
    """Check the five perturbation properties, sign preservation and the objective gap.

    ``details["checks"]`` maps "1".."5", "P" and "gap" to booleans and
    ``witnesses`` lists every failure.
    """
    S, Se = P.original, P.perturbed
    c = vec(c)
    if rank(S.A) < S.d:
        raise RankDeficient("the verifier needs a pointed polyhedron")
    pairs = _pairs(P)
    wit: list[dict] = []
    checks: dict[str, bool] = {}

    feas = {U: S.is_feasible(x) for U, x, _ in pairs}
    feas_e = {U: Se.is_feasible(xe) for U, _, xe in pairs}

    # (5) first: it also settles full-dimensionality in (1)
    nd = check_nondegenerate(Se)
    checks["5"] = nd.ok
    if not nd.ok:
        wit.append({"check": "5", "points": [tuple(map(str, p)) for p, _ in nd.witnesses[:3]]})

    nonempty, nonempty_e = any(feas.values()), any(feas_e.values())
    # a non-degenerate vertex has d independent tight rows, so its cone is full-dimensional
    checks["1"] = nonempty == nonempty_e and (not nonempty_e or nd.ok)
    if not checks["1"]:
        wit.append({"check": "1", "original": nonempty, "perturbed": nonempty_e})

    bad2 = [U for U, _, _ in pairs if feas_e[U] and not feas[U]]
    checks["2"] = not bad2
    if bad2:
        wit.append({"check": "2", "bases": bad2})

    bad3 = []
    for rec in basic_solutions(S):
        if rec.feasible and not any(feas_e.get(B.indices, False) for B in rec.defining_bases):
            bad3.append(tuple(str(v) for v in rec.point))
    checks["3"] = not bad3
    if bad3:
        wit.append({"check": "3", "vertices": bad3})

    ref = enumerate_optimum(S, c)
    ok4 = True
    if nonempty_e:
        vals = {U: dot(c, xe) for U, _, xe in pairs if feas_e[U]}
        ref_e = enumerate_optimum(Se, c)
        if ref_e.status != ref.status:
            ok4 = False
            wit.append({"check": "4", "status": (ref.status, ref_e.status)})
        elif ref.status == "optimal":
            best = min(vals.values())
            for U, _, _ in pairs:
                if feas_e[U] and vals[U] == best:
                    x = next(x for V, x, _ in pairs if V == U)
                    if not (feas[U] and dot(c, x) == ref.objective):
                        ok4 = False
                        wit.append({"check": "4", "basis": U})
    elif ref.status != "infeasible":
        ok4 = False
    checks["4"] = ok4

    badP = []
    for U, x, xe in pairs:
        for i in range(S.m):
            s = dot(S.A[i], x) - S.b[i]
            if s == 0:
                continue
            se = dot(S.A[i], xe) - Se.b[i]
            if (s > 0) != (se > 0) or se == 0:
                badP.append((U, i))
    checks["P"] = not badP
    if badP:
        wit.append({"check": "P", "pairs": badP[:10]})

    delta = max_subdeterminant(S)
    cz = vec(c)
    limit = Fraction(1, 2 * delta * delta) if delta else Fraction(1)
    badg = [U for U, x, xe in pairs if abs(dot(cz, x) - dot(cz, xe)) >= limit]
    checks["gap"] = not badg
    if badg:
        wit.append({"check": "gap", "bases": badg})

    return CheckReport(all(checks.values()), wit, {
        "checks": checks, "bases": len(pairs), "delta_d": delta, "epsilon": P.epsilon,
        "provenance": P.provenance})


def adaptive_epsilon(S: InequalitySystem, c: Sequence, nonneg: bool = False,
                     cap: int = ADAPTIVE_CAP) -> tuple[PerturbedSystem, CheckReport]:
    """Try eps = 2^-k for k = 4, 8, 16, ... and keep the first that verifies."""
    k = 4
    tried = []
    while k <= cap:
        eps = Fraction(1, 1 << k)
        make = perturb_with_nonneg if nonneg else perturb_rhs
        P = make(S, eps, provenance=f"adaptive({k})")
        rep = verify_perturbation_properties(P, c)
        tried.append(k)
        if rep.ok:
            rep.details["k"] = k
            rep.details["tried"] = tried
            return P, rep
        k *= 2
    raise NotFound(f"no eps = 2^-k with k <= {cap} verified", tried)


def choose_epsilon(S: InequalitySystem, c: Sequence, mode: str = "auto",
                   nonneg: bool = False) -> PerturbedSystem:
    """Certified eps for small systems (m + d <= 8) in auto mode, adaptive otherwise."""
    if mode not in ("auto", "certified", "adaptive"):
        raise InputError(f"unknown epsilon mode {mode!r}")
    if mode == "auto":
        mode = "certified" if S.m + S.d <= 8 else "adaptive"
    if mode == "adaptive":
        return adaptive_epsilon(S, c, nonneg)[0]
    if nonneg:
        eps = nonneg_epsilon_bound(main_rows(S), c)
        return perturb_with_nonneg(S, eps, provenance="certified")
    return perturb_rhs(S, epsilon_bound(S, c), provenance="certified")
