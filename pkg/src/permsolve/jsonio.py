"""JSON helpers: 17-significant-digit float rendering and located parse errors.

The stdlib encoder has no hook for float formatting, so documents are emitted
by a small recursive writer; parsing is plain ``json.loads`` wrapped to report
the error location.
"""

from __future__ import annotations

import json
import math

from .errors import DocumentError


def format_float(x: float) -> str:
    """Render an IEEE-754 double with 17 significant digits (round-trip safe)."""
    if math.isnan(x) or math.isinf(x):
        raise DocumentError(f"non-finite number {x!r} cannot be serialized")
    return format(float(x), ".17g")


def dumps(obj) -> str:
    """Serialize dicts/lists/scalars to JSON with 17-digit floats."""
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def _write(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int,)):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise DocumentError(f"JSON object keys must be strings, got {k!r}")
            out.append(json.dumps(k))
            out.append(":")
            _write(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _write(v, out)
        out.append("]")
    else:
        raise DocumentError(f"cannot serialize object of type {type(obj)!r}")


def loads(text: str):
    """Parse JSON, raising DocumentError with line/column on malformed input."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
