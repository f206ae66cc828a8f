"""Deterministic writers: JSON and CSV with 17-significant-digit floats.

Floats are printed with '%.17g', which round-trips IEEE-754 doubles
exactly; CSV uses '.' decimals, ',' separators and LF line endings.  The
stdlib json encoder is bypassed for emission because it offers no hook for
fixed float formatting; parsing still uses ``json.loads``.
"""

from __future__ import annotations

import json

import numpy as np

FORMAT_VERSION = 1


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                out.append(", ")
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {type(key)}")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(": ")
            _emit(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, value in enumerate(items):
            if i:
                out.append(", ")
            _emit(value, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def dumps(obj) -> str:
    """JSON text with deterministic key order and 17-digit floats."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def loads(text: str):
    return json.loads(text)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    text = str(value)
    if "," in text or '"' in text or "\n" in text:
        return '"' + text.replace('"', '""') + '"'
    return text


def csv_text(columns, rows, preamble: dict | None = None) -> str:
    """CSV with optional '# key: value' comment lines before the header."""
    lines = []
    if preamble:
        for key, value in preamble.items():
            rendered = dumps(value) if isinstance(value, (dict, list)) else _cell(value)
            lines.append(f"# {key}: {rendered}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"
