"""System files (JSON with exact rational strings), atomic writes and OFF export."""
from __future__ import annotations

import hashlib
import json
import os
import re
import sys
import tempfile
from fractions import Fraction
from typing import Any, Optional

from .errors import DimensionTooHigh, InputError
from .exact import dot, sub
from .polytope import build_graph, irredundant_rows
from .system import InequalitySystem

# certified constants have far more than the default 4300 decimal digits
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


class ParseError(InputError):
    """A malformed system file; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})" if line else message)
        self.line = line
        self.column = column


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _where(text: str, token: str) -> tuple[int, int]:
    pos = text.find(token)
    if pos < 0:
        return 0, 0
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def parse_rational(s: Any, text: str = "") -> Fraction:
    if not isinstance(s, str) or not _RATIONAL.match(s):
        line, col = _where(text, json.dumps(s)) if text else (0, 0)
        raise ParseError(f"not an exact rational string: {s!r}", line, col)
    if "/" in s and int(s.split("/")[1]) == 0:
        raise ParseError(f"zero denominator in {s!r}", *_where(text, json.dumps(s)))
    return Fraction(s)


def system_from_doc(doc: dict, text: str = "") -> InequalitySystem:
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object", 1, 1)
    for key in ("d", "m", "A", "b"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    d, m, A, b = doc["d"], doc["m"], doc["A"], doc["b"]
    if not isinstance(d, int) or not isinstance(m, int) or d < 1 or m < 1:
        raise ParseError("d and m must be positive integers", *_where(text, '"d"'))
    if not isinstance(A, list) or len(A) != m or any(not isinstance(r, list) or len(r) != d for r in A):
        raise ParseError(f"A must be {m} rows of {d} entries", *_where(text, '"A"'))
    if not isinstance(b, list) or len(b) != m:
        raise ParseError(f"b must have {m} entries", *_where(text, '"b"'))
    rows = tuple(tuple(parse_rational(v, text) for v in r) for r in A)
    rhs = tuple(parse_rational(v, text) for v in b)
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != m):
        raise ParseError(f"labels must be a list of {m} strings", *_where(text, '"labels"'))
    try:
        return InequalitySystem(rows, rhs, tuple(labels) if labels else None)
    except InputError as e:
        raise ParseError(str(e)) from None


def loads_system(text: str) -> tuple[InequalitySystem, dict]:
    """Parse a system file. Returns the system and the optional ``meta`` object."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    S = system_from_doc(doc, text)
    return S, doc.get("meta") or {}


def load_system(path: str) -> tuple[InequalitySystem, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    return loads_system(text)


def system_doc(S: InequalitySystem, meta: Optional[dict] = None) -> dict:
    doc: dict[str, Any] = {
        "d": S.d,
        "m": S.m,
        "A": [[rational_str(v) for v in r] for r in S.A],
        "b": [rational_str(v) for v in S.b],
    }
    if S.labels:
        doc["labels"] = list(S.labels)
    if meta:
        doc["meta"] = meta
    return doc


def dumps_system(S: InequalitySystem, meta: Optional[dict] = None) -> str:
    return json.dumps(system_doc(S, meta), indent=1) + "\n"


def digest(S: InequalitySystem) -> str:
    canon = json.dumps(system_doc(S), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".rockforge-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_system(path: str, S: InequalitySystem, meta: Optional[dict] = None) -> None:
    write_atomic(path, dumps_system(S, meta))


# ------------------------------------------------------------------------ OFF

def _cycle(idx: list[int], adj) -> list[int]:
    """Order the vertices of a polygonal face along its boundary cycle."""
    members = set(idx)
    order = [idx[0]]
    while len(order) < len(idx):
        nxt = [v for v in adj[order[-1]] if v in members and v not in order]
        if not nxt:
            raise InputError("face boundary is not a simple cycle")
        order.append(min(nxt))
    return order


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def to_off(S: InequalitySystem, precision: int = 12) -> str:
    """OFF mesh of a polytope of dimension at most 3, padded to 3 coordinates."""
    if S.d > 3:
        raise DimensionTooHigh(f"OFF export needs d <= 3, got d = {S.d}")
    G = build_graph(S)
    pts = [v.point for v in G.vertices]
    faces: list[list[int]] = []
    if S.d == 2:
        faces.append(_cycle(list(range(len(pts))), G.adjacency))
    elif S.d == 3:
        for i in irredundant_rows(S):
            idx = [k for k, v in enumerate(G.vertices) if i in v.tight_rows]
            face = _cycle(idx, G.adjacency)
            p0, p1, p2 = (pts[k] for k in face[:3])
            # outward orientation: the face normal agrees with row i
            if dot(_cross(sub(p1, p0), sub(p2, p0)), S.A[i]) < 0:
                face.reverse()
            faces.append(face)
    pad = (Fraction(0),) * (3 - S.d)
    lines = ["OFF", f"{len(pts)} {len(faces)} 0"]
    for p in pts:
        lines.append(" ".join(f"{float(x):.{precision}g}" for x in p + pad))
    for f in faces:
        lines.append(" ".join(str(v) for v in [len(f)] + f))
    lines.append(f"# decimal coordinates at {precision} significant digits; exact vertices follow")
    for k, p in enumerate(pts):
        lines.append(f"# v{k} = (" + ", ".join(rational_str(x) for x in p) + ")")
    return "\n".join(lines) + "\n"
