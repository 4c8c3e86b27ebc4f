"""File formats: reports as JSON/CSV with fixed 17-digit floats, fields as CSV."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .modes import ComplexField, Grid, ModeBasis


def fmt(x) -> str:
    """Fixed-precision text for one scalar (17 significant digits)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.17g}"
    return str(x)


def _json(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        # JSON has no inf/nan literals
        return json.dumps(fmt(obj))
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    return json.dumps(str(obj))


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text; non-finite floats become the strings ``"inf"``/``"nan"``."""
    return _json(obj, indent, 0) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_field_csv(path, field: ComplexField):
    write_csv(path, ["coordinate", "re", "im"], zip(field.grid.points, field.values.real, field.values.imag))


def read_field_csv(path, grid: Grid | None = None) -> ComplexField:
    """Read a field; the grid is rebuilt from the coordinate column unless given."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if grid is None:
        grid = Grid.from_points(data[:, 0])
    elif not np.allclose(grid.points, data[:, 0], rtol=0, atol=1e-12):
        raise ValueError("coordinate column does not match the supplied grid")
    return ComplexField(data[:, 1] + 1j * data[:, 2], grid)


def write_basis(directory, basis: ModeBasis, stem: str = "mode") -> Path:
    """Write one CSV per mode plus ``basis.json`` listing them in order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for k, f in enumerate(basis.modes):
        name = f"{stem}_{k}.csv"
        write_field_csv(directory / name, f)
        names.append(name)
    out = directory / "basis.json"
    write_json(out, names)
    return out


def read_basis(path) -> ModeBasis:
    path = Path(path)
    names = json.loads(path.read_text())
    fields = [read_field_csv(path.parent / names[0])]
    grid = fields[0].grid
    fields += [read_field_csv(path.parent / n, grid) for n in names[1:]]
    return ModeBasis(tuple(fields))
