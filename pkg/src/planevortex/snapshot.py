"""Binary field snapshots with a JSON sidecar.

Layout (all little-endian, 8-byte words):

    magic  b"PVF1\\0\\0\\0\\0"
    kind   int64, 0 = Cartesian, 1 = polar
    extent float64, L for Cartesian grids, R for polar grids
    stretch float64, radial stretch of polar grids (0 otherwise)
    n1, n2 int64, array shape per component (n, n) or (n_r + 1, n_theta)
    ncomp  int64, 1 for scalars, 2 for vectors

followed by ncomp * n1 * n2 float64 values in row-major order.  The sidecar
``<path>.json`` holds free-form metadata such as time, viscosity and label.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .fields import GridSpec2D, PolarGrid2D, ScalarField2D, VectorField2D

MAGIC = b"PVF1\0\0\0\0"
_HEADER = struct.Struct("<8sqddqqq")
_KINDS = {"cartesian": 0, "polar": 1}


class SnapshotError(ValueError):
    pass


def _grid_header(grid) -> tuple[int, float, float, int, int]:
    if isinstance(grid, GridSpec2D):
        return _KINDS["cartesian"], grid.extent, 0.0, grid.n, grid.n
    if isinstance(grid, PolarGrid2D):
        return _KINDS["polar"], grid.R, grid.stretch, grid.n_r + 1, grid.n_theta
    raise TypeError(f"unsupported grid {type(grid).__name__}")


def write_snapshot(path, field, meta: dict | None = None) -> Path:
    """Write a scalar or vector field and its metadata sidecar."""
    path = Path(path)
    grid = field.grid
    kind, extent, stretch, n1, n2 = _grid_header(grid)
    values = np.asarray(field.values, dtype="<f8")
    ncomp = 2 if isinstance(field, VectorField2D) else 1
    if values.size != ncomp * n1 * n2:
        raise SnapshotError("array size does not match the grid")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, kind, float(extent), float(stretch), n1, n2, ncomp))
        fh.write(np.ascontiguousarray(values).tobytes(order="C"))
    side = dict(meta or {})
    side.setdefault("kind", "cartesian" if kind == 0 else "polar")
    with open(str(path) + ".json", "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True, default=float)
    return path


def read_snapshot(path):
    """Return (field, meta) from a snapshot written by `write_snapshot`."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError("truncated header")
    magic, kind, extent, stretch, n1, n2, ncomp = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError("bad magic")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != ncomp * n1 * n2:
        raise SnapshotError("payload size does not match the header")
    if kind == 0:
        grid = GridSpec2D(extent, n1)
    elif kind == 1:
        grid = PolarGrid2D(extent, n1 - 1, n2, stretch)
    else:
        raise SnapshotError(f"unknown grid kind {kind}")
    values = body.reshape((ncomp, n1, n2) if ncomp == 2 else (n1, n2)).astype(float)
    field = VectorField2D(grid, values) if ncomp == 2 else ScalarField2D(grid, values)
    side = Path(str(path) + ".json")
    meta = json.loads(side.read_text()) if side.exists() else {}
    return field, meta
