"""Deterministic writers for JSON reports, DOT posets and CSV tables.

Floats are printed with 17 significant digits and dictionary order is kept
as built, so the same inputs give byte-identical files.
"""

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj, indent, level, out):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, Fraction):
        out.append(json.dumps(f"{obj.numerator}/{obj.denominator}"))
    elif isinstance(obj, complex):
        _encode([obj.real, obj.imag], indent, level, out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(isinstance(v, (int, float, str, bool, np.number)) for v in items):
            parts = []
            for v in items:
                _encode(v, indent, level + 1, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad)
            _encode(v, indent, level + 1, out)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Serialize ``obj`` to JSON with fixed 17-digit float formatting."""
    out = []
    _encode(obj, indent, 0, out)
    return "".join(out) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def poset_dot(fixed_points, edges, index=None) -> str:
    """DOT digraph with one node per fixed point and one edge per connection."""
    lines = ["digraph poset {", "  rankdir=TB;"]
    for rec in fixed_points:
        label = rec.id if index is None else f"{rec.id}\\nind={index[rec.id]}"
        lines.append(f'  "{rec.id}" [label="{label}"];')
    for e in sorted(edges, key=lambda e: (e.source, e.target)):
        lines.append(f'  "{e.source}" -> "{e.target}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows))
    return path
