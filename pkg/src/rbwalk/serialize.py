"""JSON output with floats written at 17 significant digits.

The stdlib encoder writes the shortest round-trip repr; reports here use a
fixed ``%.17g`` form so files diff cleanly across platforms.
"""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["dumps", "write_json", "write_jsonl", "read_jsonl"]


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # JSON has no literal for these
        return json.dumps(str(x))
    return format(x, ".17g")


def _encode(obj, parts):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        parts.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if k:
                parts.append(", ")
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _encode(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for k, value in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if k:
                parts.append(", ")
            _encode(value, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    parts: list[str] = []
    _encode(obj, parts)
    return "".join(parts)


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps(rec))
            fh.write("\n")


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
