"""Deterministic JSON/CSV writers.

Floats are rendered with 12 significant digits so identical configurations
produce byte-identical artifacts regardless of platform printf quirks.
"""

from __future__ import annotations

import math
from pathlib import Path


def format_float(x: float) -> str:
    if x != x:
        raise ValueError("refusing to serialize NaN")
    if math.isinf(x):
        raise ValueError("refusing to serialize infinity")
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return f"{x:.12g}"


def _render(obj, indent: int) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        inner = ",\n".join(
            f'{pad}  "{k}": {_render(v, indent + 1)}' for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(f"{pad}  {_render(v, indent + 1)}" for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    # numpy scalars and other float-likes
    if hasattr(obj, "item"):
        return _render(obj.item(), indent)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    return _render(obj, 0) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj))
    return path


def write_csv(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            elif isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, int):
                cells.append(str(v))
            else:
                cells.append(format_float(float(v)))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path
