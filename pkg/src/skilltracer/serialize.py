"""Deterministic JSON emission for wire payloads.

Every float is written with 17 significant digits, enough to reconstruct
the exact double on parse, so transcripts are byte-stable and clients can
round-trip coefficients without drift.  The standard json encoder hardwires
float.__repr__ (shortest form, which varies in digit count), hence this
small emitter.  Payloads are plain trees of dict/list/str/numbers/bool/None.
"""

from __future__ import annotations

import json
import math


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite floats have no JSON representation")
    return format(x, ".17g")


def dumps(payload) -> str:
    """Compact JSON text with pinned float formatting."""
    parts: list = []
    _emit(payload, parts)
    return "".join(parts)


def _emit(value, parts: list) -> None:
    if value is None or value is True or value is False:
        parts.append("null" if value is None else "true" if value else "false")
    elif isinstance(value, str):
        parts.append(json.dumps(value))
    elif isinstance(value, float):
        parts.append(format_float(value))
    elif isinstance(value, int):
        parts.append(str(value))
    elif isinstance(value, dict):
        parts.append("{")
        for i, (key, item) in enumerate(value.items()):
            if not isinstance(key, str):
                raise TypeError(f"object keys must be strings, got {key!r}")
            if i:
                parts.append(",")
            parts.append(json.dumps(key))
            parts.append(":")
            _emit(item, parts)
        parts.append("}")
    elif isinstance(value, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(value):
            if i:
                parts.append(",")
            _emit(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"{type(value).__name__} is not JSON-serializable")
