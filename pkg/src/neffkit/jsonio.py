"""Deterministic JSON with exact float round-trips.

The stock ``json`` encoder uses ``repr`` for floats, which is already
round-trip safe, but it happily emits ``NaN`` and ``Infinity`` -- tokens that
``JSON.parse`` rejects. Everything this package persists or serves must be
consumable by a browser, so this module:

* formats finite floats with 17 significant digits (lossless for float64),
* maps every non-finite float to ``null``,
* accepts numpy scalars and arrays transparently,
* keeps dict insertion order (no key sorting), so output is reproducible.

Reading uses the stdlib parser; numbers come back as int or float exactly
as written.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def format_float(value: float) -> str:
    """Render one finite float64 so that ``float()`` of it is bit-identical."""
    out = format(value, ".17g")
    # ".17g" never produces 'inf'/'nan' here; callers filter non-finite first.
    return out


def _write(obj: Any, parts: list[str], indent: int | None, level: int) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        parts.append(format_float(v) if math.isfinite(v) else "null")
    elif isinstance(obj, np.ndarray):
        _write(obj.tolist(), parts, indent, level)
    elif isinstance(obj, (list, tuple)):
        if not obj:
            parts.append("[]")
            return
        open_, close, sep, pad = _punct("[", "]", indent, level)
        parts.append(open_)
        for i, item in enumerate(obj):
            if i:
                parts.append(sep)
            parts.append(pad)
            _write(item, parts, indent, level + 1)
        parts.append(close)
    elif isinstance(obj, dict):
        if not obj:
            parts.append("{}")
            return
        open_, close, sep, pad = _punct("{", "}", indent, level)
        parts.append(open_)
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key).__name__}")
            if i:
                parts.append(sep)
            parts.append(pad)
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(": " if indent is not None else ":")
            _write(value, parts, indent, level + 1)
        parts.append(close)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def _punct(open_: str, close: str, indent: int | None, level: int):
    """Opening/closing tokens plus item separator and per-item padding."""
    if indent is None:
        return open_, close, ",", ""
    pad = "\n" + " " * (indent * (level + 1))
    close_pad = "\n" + " " * (indent * level)
    return open_, close_pad + close, ",", pad


def dumps(obj: Any, indent: int | None = None) -> str:
    parts: list[str] = []
    _write(obj, parts, indent, 0)
    return "".join(parts)


def dump_bytes(obj: Any, indent: int | None = None) -> bytes:
    return dumps(obj, indent=indent).encode("utf-8")


def loads(text: str | bytes) -> Any:
    return json.loads(text)
