"""CSV and JSON file formats.

Data CSV: a header row ``x1,...,xd,y`` then one row per site. Point CSV:
``x1,...,xd`` (a trailing ``y`` column is ignored). Numbers are written
with 17 significant digits, enough to round-trip any double.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from greenkernel.errors import ValidationError
from greenkernel.interpolation import Dataset


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _read_rows(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        [float(h) for h in header]
    except ValueError:
        pass
    else:
        raise ValidationError(f"{path}: header row required (x1,...,xd[,y])")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ValidationError(f"{path}: every row must have {len(header)} columns")
    try:
        values = np.array([[float(c) for c in r] for r in body], dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric entry ({exc})") from exc
    return header, values


def _coordinate_columns(header, path, with_y):
    coords = [h for h in header if h != "y"]
    expected = [f"x{i + 1}" for i in range(len(coords))]
    if coords != expected:
        raise ValidationError(f"{path}: coordinate columns must be named {','.join(expected)}")
    if with_y and header[-1] != "y":
        raise ValidationError(f"{path}: last column must be y")
    return len(coords)


def read_dataset(path, dim: int | None = None) -> Dataset:
    header, values = _read_rows(path)
    d = _coordinate_columns(header, path, with_y=True)
    if dim is not None and d != dim:
        raise ValidationError(f"{path}: expected {dim} coordinate columns, found {d}")
    if not len(values):
        raise ValidationError(f"{path}: no data rows")
    return Dataset(values[:, :d], values[:, d])


def read_points(path, dim: int | None = None) -> np.ndarray:
    header, values = _read_rows(path)
    d = _coordinate_columns(header, path, with_y=False)
    if dim is not None and d != dim:
        raise ValidationError(f"{path}: expected {dim} coordinate columns, found {d}")
    pts = values[:, :d]
    if not np.all(np.isfinite(pts)):
        raise ValidationError(f"{path}: points must be finite")
    return pts


def format_csv(points, values=None) -> str:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = pts.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + (["y"] if values is not None else [])
    lines = [",".join(header)]
    for i, row in enumerate(pts):
        cells = [_fmt(v) for v in row]
        if values is not None:
            cells.append(_fmt(values[i]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path, points, values=None) -> None:
    Path(path).write_text(format_csv(points, values))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj, pretty: bool = False) -> str:
    """Deterministic JSON; floats use the shortest repr that round-trips."""
    return json.dumps(_plain(obj), indent=2 if pretty else None, allow_nan=True)


def read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from exc


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")
