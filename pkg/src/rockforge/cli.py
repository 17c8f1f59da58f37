"""Command-line interface.

Exit codes: 0 when every verdict holds, 1 on a verification failure,
2 on bad input.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import construct, io, polytope, solver
from .errors import (
    ContainmentFailed,
    CycleDetected,
    InputError,
    NoMonotonePath,
    NonPositiveCoefficient,
    NotInterior,
    RockforgeError,
    StartInfeasible,
    TransferInfeasible,
)
from .exact import dot, encoding_size, norm1, scale_to_integrality
from .report import Report, compare, replay, verdict
from .system import InequalitySystem

CERTIFIED_LIMIT = 8
# failures of the construction itself rather than of the input
_VERIFY_ERRORS = (ContainmentFailed, CycleDetected, NoMonotonePath, NonPositiveCoefficient,
                  NotInterior, StartInfeasible, TransferInfeasible)


def _vector(text: str, d: int) -> tuple[Fraction, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) != d:
        raise InputError(f"expected {d} comma-separated rationals, got {len(parts)}")
    return tuple(io.parse_rational(p) for p in parts)


def _indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise InputError(f"bad index list {text!r}") from None


def _gate(S: InequalitySystem, mode: str) -> None:
    if mode == "certified" and S.m + S.d > CERTIFIED_LIMIT:
        raise InputError(
            f"certified mode is limited to m + d <= {CERTIFIED_LIMIT} (got {S.m + S.d}); "
            "its constants have astronomically many bits, use --mode practical")


def _emit(rep: Report, args) -> int:
    text = rep.dumps()
    if getattr(args, "report", None):
        io.write_atomic(args.report, text)
    if not getattr(args, "quiet", False):
        sys.stdout.write(text)
    return 0 if rep.ok else 1


def _guard(fn):
    """Run a checker, turning library errors into a failed verdict."""
    try:
        return fn()
    except RockforgeError as e:
        return verdict(False, witnesses=[{"error": type(e).__name__, "message": str(e)}])


# ----------------------------------------------------------------- commands

def cmd_check(args) -> int:
    S, _ = io.load_system(args.path)
    rep = Report("check", io.digest(S))
    which = args.which or ["nondeg", "totnondeg", "simple", "simplexcore"]

    def simple():
        r = polytope.check_simplicity(S)
        return verdict(r.ok, witnesses=r.witnesses)

    def core():
        I = polytope.find_simplex_subsystem(S)
        rep.doc["result"]["simplex_core"] = I
        return verdict(I is not None, witnesses=[] if I else [{"message": "no simplex-bounding rows"}])

    checks = {
        "nondeg": lambda: (lambda r: verdict(r.ok, witnesses=r.witnesses))(polytope.check_nondegenerate(S)),
        "totnondeg": lambda: (lambda r: verdict(r.ok, witnesses=r.witnesses))(
            polytope.check_totally_nondegenerate(S)),
        "simple": simple,
        "simplexcore": core,
    }
    for w in which:
        rep.add(w, _guard(checks[w]))
    return _emit(rep, args)


def _rock_trace(B: construct.RockBuild) -> dict:
    R = B.extension
    p = R.params
    return {
        "mode": p.mode,
        "D": p.D,
        "eps_initial": p.eps_initial,
        "mu_schedule": [{"row": s.row, "mu": s.mu, "eps_after": s.eps_after, "a": s.a} for s in p.mu_schedule],
        "order": p.order,
        "batches": p.batches,
        "core": R.simplex_core,
        "a": R.a,
        "shift": B.shift.o,
        "box_row": B.box_row,
        "vertex_basis": B.vertex_basis,
        "base": io.system_doc(R.base_system),
    }


def _log_bound(n: int) -> int:
    k = 0
    while (1 << k) < n - 2:
        k += 1
    return 2 * k + 4


def cmd_rock(args) -> int:
    S, _ = io.load_system(args.path)
    _gate(S, args.mode)
    rep = Report("rock", io.digest(S), args.mode)
    vertex = _indices(args.vertex) if args.vertex else None
    B = construct.build_rock(S, mode=args.mode, batched=args.batched, vertex=vertex)
    R = B.extension
    rep.doc["trace"] = _rock_trace(B)
    if B.schedule is not None:
        rep.doc["trace"]["schedule"] = {"batches": B.schedule.batches, "base": B.schedule.base}
    sw = construct.check_sandwich(R)
    rep.add("a_positive", verdict(all(x > 0 for x in R.a), witnesses=[i for i, x in enumerate(R.a) if x <= 0]))
    rep.add("sandwich", verdict(sw.ok, witnesses=sw.witnesses))
    meta = {
        "kind": "rock",
        "mode": args.mode,
        "eps": io.rational_str(R.params.eps_initial),
        "core": list(R.simplex_core),
        "top": [io.rational_str(x) for x in R.top],
        "shift": [io.rational_str(x) for x in B.shift.o],
        "batched": bool(args.batched),
        "input_m": S.m,
        "input_d": S.d,
    }
    rep.doc["result"] = {"Q_rows": R.Q_system.m, "diameter_bound": B.diameter_bound,
                         "eccentricity_bound": R.m - R.d}
    if args.batched and S.d == 2:
        rep.doc["result"]["log_diameter_bound"] = _log_bound(S.m)
    if args.out:
        io.save_system(args.out, R.Q_system, meta)
        rep.doc["result"]["written"] = args.out
    return _emit(rep, args)


def _load_rock(path: str):
    Q, meta = io.load_system(path)
    core = meta.get("core")
    R = construct.rock_from_q(Q, core)
    return Q, meta, R


def cmd_verify(args) -> int:
    Q, meta, R = _load_rock(args.path)
    rep = Report("verify", io.digest(Q), meta.get("mode"))
    d, m = R.d, R.m
    eps_text = args.eps or meta.get("eps")
    if eps_text is None:
        raise InputError("no --eps given and the file carries none")
    eps = io.parse_rational(eps_text)
    if args.top:
        top = _vector(args.top, d + 1)
    elif "top" in meta:
        top = tuple(io.parse_rational(x) for x in meta["top"])
    else:
        top = (Fraction(0),) * d + (Fraction(1),)

    rep.add("a_positive", verdict(all(x > 0 for x in R.a),
                                  witnesses=[{"row": i, "a": x} for i, x in enumerate(R.a) if x <= 0]))

    def simple():
        r = polytope.check_simplicity(Q)
        rep.doc["result"]["irredundant_rows"] = r.details["irredundant_rows"]
        return verdict(r.ok, witnesses=r.witnesses)

    rep.add("simple", _guard(simple))

    def facets():
        return compare("==", len(polytope.irredundant_rows(Q)), m + 1)

    rep.add("facets", _guard(facets))

    def top_unique():
        G = polytope.build_graph(Q)
        k = polytope.top_vertex(G)
        got = G.vertices[k].point
        return verdict(got == tuple(top), witnesses=[] if got == tuple(top) else [{"top": got, "expected": top}])

    rep.add("top_unique", _guard(top_unique))

    def conc():
        r = polytope.check_epsilon_concentrated(Q, top[:-1], top[-1], eps)
        return verdict(r.ok, witnesses=r.witnesses)

    rep.add("concentration", _guard(conc))

    def ecc():
        G = polytope.build_graph(Q)
        return compare("<=", polytope.z_increasing_eccentricity(G, -1, polytope.top_vertex(G)), m - d)

    rep.add("eccentricity", _guard(ecc))
    diam = _guard(lambda: compare("<=", polytope.diameter(polytope.build_graph(Q)), 2 * (m - d)))
    rep.add("diameter", diam)
    if meta.get("batched") and d == 2 and diam["measured"] is not None:
        rep.add("diameter_log", compare("<=", diam["measured"], _log_bound(meta.get("input_m", m))))

    if args.base:
        P, _ = io.load_system(args.base)
        rep.add("base_consistency", _guard(lambda: _base_check(P, R, meta)))
    return _emit(rep, args)


def _base_check(P: InequalitySystem, R: construct.RockExtension, meta: dict) -> dict:
    """Rows of P (shifted) appear in the base of Q; z = 0 vertices of Q are the base vertices."""
    o = tuple(io.parse_rational(x) for x in meta.get("shift", ["0"] * R.d))
    base = R.base_system
    wit = []
    for i, (Ai, bi) in enumerate(zip(P.A, P.b)):
        shifted = bi - dot(Ai, o)
        hit = False
        for Bk, ck in zip(base.A, base.b):
            # positive multiple: Bk = t Ai and ck = t shifted
            t = next((y / x for x, y in zip(Ai, Bk) if x != 0), None)
            if t is not None and t > 0 and all(y == t * x for x, y in zip(Ai, Bk)) and ck == t * shifted:
                hit = True
                break
        if not hit:
            wit.append({"row": i})
    Gv = {v.point[:-1] for v in polytope.vertices(R.Q_system) if v.point[-1] == 0}
    Bv = {v.point for v in polytope.vertices(base)}
    if Gv != Bv:
        wit.append({"projection": "z = 0 vertices of Q differ from the base vertices"})
    return verdict(not wit, witnesses=wit)


def cmd_prism(args) -> int:
    Q, meta, R = _load_rock(args.path)
    rep = Report("prism", io.digest(Q), args.mode)
    c = _vector(args.objective, R.d) if args.objective else (Fraction(0),) * R.d
    prism = construct.crooked_prism(R)
    if args.mode == "certified":
        _gate(R.base_system, "certified")
    c_hat, c_y = construct.lift_objective(R, c, args.mode, prism)
    rep.doc["trace"]["c_hat"] = c_hat
    rep.doc["trace"]["c_y"] = c_y
    c_int = construct._integral_objective(c)
    rows = InequalitySystem(R.Q_system.A[:-1], R.Q_system.b[:-1])
    size = encoding_size(scale_to_integrality(rows)[0])
    rep.doc["trace"]["certified_c_y"] = f"6*{norm1(c_int)}*2^{8 * size}+1"
    if any(x != 0 for x in c):
        rep.doc["trace"]["practical_le_certified"] = c_y <= construct.certified_c_y(R, c_int)
    r = construct.verify_monotone_paths(prism, c_hat)
    lengths = r.details["lengths"]
    rep.add("monotone_paths", compare("<=", max(lengths.values()), r.details["bound"], r.witnesses))
    rep.doc["result"]["path_lengths"] = [{"start": k, "length": v} for k, v in lengths.items()]
    simp = polytope.check_simplicity(prism.Qhat_system)
    rep.add("simple", verdict(simp.ok, witnesses=simp.witnesses))
    q_facets = len(polytope.irredundant_rows(R.Q_system))
    rep.add("facets", compare("<=", len(simp.details["irredundant_rows"]), q_facets + 2))
    if args.out:
        io.save_system(args.out, prism.Qhat_system, {
            "kind": "prism", "c_hat": [io.rational_str(x) for x in c_hat], "c_y": io.rational_str(c_y)})
        rep.doc["result"]["written"] = args.out
    return _emit(rep, args)


def cmd_solve(args) -> int:
    S, _ = io.load_system(args.path)
    _gate(S, args.mode)
    rep = Report("solve", io.digest(S), args.mode)
    c = _vector(args.objective, S.d)
    rule = solver.PivotRule.parse(args.pivot)
    if rule.name == "random" and ":" not in args.pivot:
        rule = solver.PivotRule("random", args.seed)
    eps_mode = "certified" if args.mode == "certified" else "adaptive"
    out = solver.solve_lp(S.A, S.b, c, form=args.form, eps_mode=eps_mode, rule=rule, via=args.via)
    rep.doc["trace"] = {k: v for k, v in out.info.items() if k != "perturbed_vertex"}
    rep.doc["result"] = {"status": out.status, "objective": out.objective, "vertex": out.vertex,
                         "ray": out.ray, "steps": out.steps, "pivot": str(rule)}
    if out.status == "unbounded":
        rows = list(S.A)
        if args.form == "nonneg-split":
            rows += [tuple(Fraction(-int(i == j)) for i in range(S.d)) for j in range(S.d)]
        bad = [{"row": i} for i, a in enumerate(rows) if dot(a, out.ray) > 0]
        if dot(c, out.ray) >= 0:
            bad.append({"c.r": dot(c, out.ray)})
        rep.add("ray_certificate", verdict(not bad, witnesses=bad))
    if args.oracle:
        T = S if args.form == "inequality" else solver.nonneg_system(S.A, S.b)
        ref = polytope.enumerate_optimum(T, c)
        same = ref.status == out.status and ref.objective == out.objective
        rep.add("oracle", verdict(same, witnesses=[] if same else [{"oracle": ref.status, "objective": ref.objective}]))
    return _emit(rep, args)


def cmd_export(args) -> int:
    Q, _ = io.load_system(args.path)
    text = io.to_off(Q, args.precision)
    if args.out:
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replay(args) -> int:
    import json

    try:
        with open(args.path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read report: {e}") from None
    problems = replay(doc)
    for p in problems:
        print(p)
    print("replay ok" if not problems else f"{len(problems)} problem(s)")
    return 0 if not problems else 1


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rockforge", description="Rock extensions and exact LP tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--report", help="also write the JSON report to this file")
        sp.add_argument("--quiet", action="store_true", help="do not print the report")

    sp = sub.add_parser("check", help="run polytope property checkers")
    sp.add_argument("path")
    sp.add_argument("--which", action="append", choices=["nondeg", "totnondeg", "simple", "simplexcore"])
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("rock", help="build a rock extension")
    sp.add_argument("path")
    sp.add_argument("--mode", choices=["practical", "certified"], default="practical")
    sp.add_argument("--batched", action="store_true")
    sp.add_argument("--vertex", help="comma-separated basis rows of the start vertex")
    sp.add_argument("--out", help="write the extension Q here")
    common(sp)
    sp.set_defaults(fn=cmd_rock)

    sp = sub.add_parser("verify", help="verify the rock-extension properties of Q")
    sp.add_argument("path")
    sp.add_argument("--base", help="system file of the original polytope")
    sp.add_argument("--eps", help="concentration radius (default: from the file)")
    sp.add_argument("--top", help="top vertex, comma-separated")
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("prism", help="build the crooked prism and check monotone paths")
    sp.add_argument("path")
    sp.add_argument("--objective", help="c as comma-separated rationals (minimized)")
    sp.add_argument("--mode", choices=["practical", "certified"], default="practical")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(fn=cmd_prism)

    sp = sub.add_parser("solve", help="solve min c.x over the system")
    sp.add_argument("path")
    sp.add_argument("--objective", required=True)
    sp.add_argument("--mode", choices=["practical", "certified"], default="practical")
    sp.add_argument("--form", choices=["inequality", "nonneg-split"], default="inequality")
    sp.add_argument("--pivot", default="bland", help="bland, dantzig or random:<seed>")
    sp.add_argument("--via", choices=["direct", "prism"], default="direct")
    sp.add_argument("--oracle", action="store_true", help="cross-check with brute-force enumeration")
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("export", help="write an OFF mesh of a polytope with d <= 3")
    sp.add_argument("path")
    sp.add_argument("--format", choices=["off"], default="off")
    sp.add_argument("--precision", type=int, default=12)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_export)

    sp = sub.add_parser("replay", help="re-check the verdicts of a saved report")
    sp.add_argument("path")
    sp.set_defaults(fn=cmd_replay)
    return p


_VALUE_FLAGS = ("--objective", "--top", "--eps", "--vertex")


def _glue(argv: Sequence[str]) -> list[str]:
    # let "--objective -1,2" through: argparse would read -1,2 as an option
    out, it = [], iter(argv)
    for a in it:
        if a in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_glue(argv))
    try:
        return args.fn(args)
    except _VERIFY_ERRORS as e:
        print(f"rockforge: verification failed: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except RockforgeError as e:
        print(f"rockforge: {type(e).__name__}: {e}", file=sys.stderr)
        if e.witnesses:
            print(f"  witnesses: {e.witnesses[:3]}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
