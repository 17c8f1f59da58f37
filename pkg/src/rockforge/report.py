"""Machine-readable reports and an independent replay of their verdicts.

A verdict is ``{ok, relation, measured, bound, witnesses}``. Numbers are
exact strings. ``relation`` is one of ``<=``, ``==``, ``>=`` or ``holds``;
for the first three, ``ok`` must equal ``measured relation bound``, and for
``holds`` it must equal "no witnesses".
"""
from __future__ import annotations

import json
import time
from fractions import Fraction
from typing import Any, Optional

from .exact import norm1, norm2_sq
from .io import rational_str

_RELATIONS = {
    "<=": lambda a, b: a <= b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
}


def jsonable(x: Any) -> Any:
    """Fractions become exact strings; containers are converted recursively."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    return str(x)


def verdict(ok: bool, relation: str = "holds", measured=None, bound=None, witnesses=()) -> dict:
    return {
        "ok": bool(ok),
        "relation": relation,
        "measured": jsonable(measured),
        "bound": jsonable(bound),
        "witnesses": jsonable(list(witnesses)),
    }


def compare(relation: str, measured, bound, witnesses=()) -> dict:
    ok = _RELATIONS[relation](Fraction(measured), Fraction(bound))
    return verdict(ok, relation, measured, bound, witnesses)


class Report:
    def __init__(self, command: str, digest: str, mode: Optional[str] = None):
        self.doc: dict[str, Any] = {"command": command, "digest": digest, "mode": mode,
                                    "verdicts": {}, "trace": {}, "result": {}}
        self._t0 = time.perf_counter()

    def add(self, name: str, v: dict) -> None:
        self.doc["verdicts"][name] = v

    @property
    def ok(self) -> bool:
        return all(v["ok"] for v in self.doc["verdicts"].values())

    def finish(self) -> dict:
        self.doc["ok"] = self.ok
        self.doc["timing"] = {"seconds": round(time.perf_counter() - self._t0, 4)}
        self.doc["trace"] = jsonable(self.doc["trace"])
        self.doc["result"] = jsonable(self.doc["result"])
        return self.doc

    def dumps(self) -> str:
        return json.dumps(self.finish(), indent=1) + "\n"


def _q(t: Fraction, mu: Fraction, Ai, bi: Fraction) -> Fraction:
    return t * t * (1 - mu * mu) - 2 * t * bi + bi * bi - mu * mu * norm2_sq(Ai)


def replay(doc: dict) -> list[str]:
    """Re-check every verdict of a report from its own numbers.

    Returns a list of problems; an empty list means the report is
    self-consistent. When the report carries a rock trace with its base
    rows, the tilt coefficients are re-validated from scratch as well.
    """
    problems = []
    for name, v in doc.get("verdicts", {}).items():
        rel = v.get("relation")
        if rel in _RELATIONS:
            want = _RELATIONS[rel](Fraction(v["measured"]), Fraction(v["bound"]))
        elif rel == "holds":
            want = not v.get("witnesses")
        else:
            problems.append(f"{name}: unknown relation {rel!r}")
            continue
        if want != v.get("ok"):
            problems.append(f"{name}: ok={v.get('ok')} but the evidence says {want}")
    tr = doc.get("trace", {})
    if "mu_schedule" in tr and "base" in tr:
        problems += _replay_rock(tr)
    return problems


def _replay_rock(tr: dict) -> list[str]:
    out = []
    A = [[Fraction(v) for v in r] for r in tr["base"]["A"]]
    b = [Fraction(v) for v in tr["base"]["b"]]
    a = [Fraction(v) for v in tr["a"]]
    d = len(A[0])
    D = Fraction(tr["D"])
    eps = Fraction(tr["eps_initial"])
    if any(x <= 0 for x in a):
        out.append("tilt vector is not positive")
    for i in tr["core"]:
        if a[i] != b[i]:
            out.append(f"core row {i} is not tilted by its right-hand side")
    cap = min(min(4 * d * bi / (norm1(Ai) + bi) for Ai, bi in zip(A, b)), Fraction(1, 4 * d))
    for st in tr["mu_schedule"]:
        i, mu, after = st["row"], Fraction(st["mu"]), Fraction(st["eps_after"])
        if mu != min(cap, eps / D):
            out.append(f"row {i}: mu does not follow the recursion")
        if after != mu / (4 * d):
            out.append(f"row {i}: eps_after differs from mu/4d")
        ai, mu2 = a[i], mu / (4 * d)
        if not (_q(ai, mu, A[i], b[i]) <= 0 and ai <= b[i] / (1 - mu * mu)):
            out.append(f"row {i}: tilt below the mu tilt")
        if not (_q(ai, mu2, A[i], b[i]) >= 0 and ai <= b[i] / (1 - mu2 * mu2)):
            out.append(f"row {i}: tilt above the mu/4d tilt")
        eps = after
    return out
