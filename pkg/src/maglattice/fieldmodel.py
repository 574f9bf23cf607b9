"""Common interface for the analytic and prism field models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"points must have shape (N, 3), got {arr.shape}")
    return arr


@dataclass(frozen=True)
class FieldVector:
    """Field at one point, Gauss."""

    bx: float
    by: float
    bz: float
    extrapolated: bool = False
    nudged: bool = False

    @property
    def magnitude(self) -> float:
        return math.hypot(self.bx, self.by, self.bz)

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz])


class FieldModel:
    """Vectorized B(r) in Gauss for points in um, bias included.

    Subclasses implement :meth:`field`; :meth:`jacobian` falls back to
    central differences.
    """

    tag = "generic"
    length_scale = 1.0  # um, sets finite-difference steps

    def field(self, points) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, points) -> np.ndarray:
        return self.field(points)

    def magnitude(self, points) -> np.ndarray:
        return np.linalg.norm(self.field(points), axis=-1)

    def jacobian(self, points) -> np.ndarray:
        """dB_i/dx_j, shape (N, 3, 3)."""
        pts = as_points(points)
        h = 1e-5 * self.length_scale
        jac = np.empty((pts.shape[0], 3, 3))
        for j in range(3):
            d = np.zeros(3)
            d[j] = h
            jac[:, :, j] = (self.field(pts + d) - self.field(pts - d)) / (2 * h)
        return jac


class CallableModel(FieldModel):
    tag = "callable"

    def __init__(self, fn, length_scale: float = 1.0):
        self._fn = fn
        self.length_scale = length_scale

    def field(self, points):
        return np.asarray(self._fn(as_points(points)), dtype=float)


def ensure_model(obj) -> FieldModel:
    if isinstance(obj, FieldModel):
        return obj
    if callable(obj):
        return CallableModel(obj)
    raise TypeError(f"expected a FieldModel or callable, got {type(obj).__name__}")


# 6th-order central first-derivative weights for offsets -3..3
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])


def jacobian_fd(field, points, h: float) -> np.ndarray:
    """dB_i/dx_j by a 6th-order central stencil of step ``h``, shape (N, 3, 3)."""
    model = ensure_model(field)
    pts = as_points(points)
    jac = np.zeros((pts.shape[0], 3, 3))
    for j in range(3):
        for k, c in zip(range(-3, 4), _D1):
            if c == 0.0:
                continue
            d = np.zeros(3)
            d[j] = k * h
            jac[:, :, j] += c * model.field(pts + d)
    return jac / h


def maxwell_residuals(field, points, h: float) -> tuple[np.ndarray, np.ndarray]:
    """(div B, |curl B|) in G/um from finite differences at each point."""
    J = jacobian_fd(field, points, h)
    div = J[:, 0, 0] + J[:, 1, 1] + J[:, 2, 2]
    curl = np.stack([J[:, 2, 1] - J[:, 1, 2], J[:, 0, 2] - J[:, 2, 0], J[:, 1, 0] - J[:, 0, 1]], axis=1)
    return div, np.linalg.norm(curl, axis=1)
