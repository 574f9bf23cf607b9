"""Dense field maps on rectilinear grids and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..fieldmodel import FieldModel
from .prisms import PrismModel, PrismSet

GRID_COLUMNS = ("x_um", "y_um", "z_um", "bx_G", "by_G", "bz_G", "b_G")


@dataclass(frozen=True, eq=False)
class FieldGrid:
    axes: tuple[np.ndarray, np.ndarray, np.ndarray]  # x, y, z
    values: np.ndarray  # (nz, ny, nx, 3)
    metadata: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.values, axis=-1)

    def points(self) -> np.ndarray:
        """Node coordinates in storage order (z-major, then y, then x)."""
        x, y, z = self.axes
        Z, Y, X = np.meshgrid(z, y, x, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    def write_csv(self, path) -> Path:
        path = Path(path)
        pts = self.points()
        vals = self.values.reshape(-1, 3)
        mag = np.linalg.norm(vals, axis=1)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(GRID_COLUMNS)
            for p, b, m in zip(pts, vals, mag):
                wr.writerow([repr(float(v)) for v in (*p, *b, m)])
        return path

    def write_metadata(self, path) -> Path:
        path = Path(path)
        meta = dict(self.metadata)
        meta.update(
            shape={"nx": len(self.axes[0]), "ny": len(self.axes[1]), "nz": len(self.axes[2])},
            order="z-major, then y, then x",
            units={"length": "um", "field": "G"},
            columns=list(GRID_COLUMNS),
        )
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path


def _check_axis(a, name):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1 or a.size == 0:
        raise ValueError(f"axis {name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"axis {name} has non-finite values")
    if a.size > 1 and not np.all(np.diff(a) > 0):
        raise ValueError(f"axis {name} must be strictly increasing")
    return a


def field_grid(source, axes, workers: int = 1, chunk: int = 4096) -> FieldGrid:
    """Evaluate B on the tensor grid ``axes = (xs, ys, zs)``.

    ``source`` is a :class:`PrismSet` or any :class:`FieldModel`.  Chunks are
    evaluated independently and reassembled in order, so the result does not
    depend on ``workers``.
    """
    xs, ys, zs = (_check_axis(a, n) for a, n in zip(axes, "xyz"))
    if isinstance(source, PrismSet):
        model = PrismModel(source)
        meta = {"model": "prism", "spec_hash": source.spec_digest,
                "bias_G": list(source.bias.as_array())}
    elif isinstance(source, FieldModel):
        model = source
        meta = {"model": source.tag}
    else:
        raise TypeError("source must be a PrismSet or FieldModel")
    grid = FieldGrid((xs, ys, zs), np.empty((len(zs), len(ys), len(xs), 3)), meta)
    pts = grid.points()
    parts = [pts[i:i + chunk] for i in range(0, len(pts), chunk)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(model.field, parts))
    else:
        results = [model.field(part) for part in parts]
    grid.values[...] = np.concatenate(results).reshape(grid.values.shape)
    return grid
