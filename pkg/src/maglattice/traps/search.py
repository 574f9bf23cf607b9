"""Local minima of |B|: vertical line scans, simplex descent, Newton polish."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from ..fieldmodel import ensure_model

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoInteriorMinimum(RuntimeError):
    """Minimum of a scan sits on the range boundary."""


class ConvergenceError(RuntimeError):
    pass


class CellEscape(RuntimeError):
    def __init__(self, point, nearest_cell):
        super().__init__(f"minimum left its seed cell; nearest cell {nearest_cell}")
        self.point = point
        self.nearest_cell = nearest_cell


class ZMinimum(NamedTuple):
    d_min: float  # above film top, um
    b_min: float  # G
    z: float  # absolute height, um


class Minimum3D(NamedTuple):
    point: np.ndarray
    b_min: float
    iterations: int


def golden_section(f, a: float, b: float, tol: float = 1e-4, max_iter: int = 200):
    """Minimize a unimodal ``f`` on [a, b] until the bracket is below ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def default_z_range(film_top: float, alpha: float) -> tuple[float, float]:
    return film_top + 0.05 * alpha, film_top + 5.0 * alpha


def _scan_grid(z_range, step):
    zlo, zhi = z_range
    if not zhi > zlo:
        raise ValueError("empty z range")
    if step is None:
        count = 991
    else:
        count = int(round((zhi - zlo) / step)) + 1
    return np.linspace(zlo, zhi, max(count, 3))


def find_z_minimum(field, x: float, y: float, z_range, film_top: float,
                   step: float | None = None, tol: float = 1e-4) -> ZMinimum:
    """Global minimum of |B| on the vertical line through (x, y).

    Coarse scan (991 samples by default, i.e. alpha/200 on the default range),
    then golden-section refinement to ``tol`` um inside the bracketing cells.
    """
    model = ensure_model(field)
    zs = _scan_grid(z_range, step)
    pts = np.column_stack([np.full_like(zs, x), np.full_like(zs, y), zs])
    mag = model.magnitude(pts)
    i = int(np.argmin(mag))
    if i == 0 or i == len(zs) - 1:
        raise NoInteriorMinimum(f"|B| minimum at z = {zs[i]:.4g} um is on the scan boundary")

    def f(z):
        return float(model.magnitude(np.array([[x, y, z]]))[0])

    z, b = golden_section(f, zs[i - 1], zs[i + 1], tol)
    if mag[i] < b:
        z, b = zs[i], float(mag[i])
    return ZMinimum(z - film_top, b, z)


def line_minima_from_samples(zs, values, film_top: float, tol: float = 1e-4):
    """Vertical minima for many sites sharing the same z samples.

    ``values`` is (K, S, 3) field samples; refinement runs golden-section on a
    local cubic spline of the exact samples.  Returns arrays (d_min, b_min, ok).
    """
    mag = np.linalg.norm(values, axis=-1)
    K, S = mag.shape
    d = np.full(S, np.nan)
    b = np.full(S, np.nan)
    ok = np.zeros(S, dtype=bool)
    idx = np.argmin(mag, axis=0)
    for s in range(S):
        i = idx[s]
        if i == 0 or i == K - 1:
            continue
        lo, hi = max(i - 3, 0), min(i + 4, K)
        spl = CubicSpline(zs[lo:hi], values[lo:hi, s, :], axis=0)
        z, bz = golden_section(lambda z: float(np.linalg.norm(spl(z))), zs[i - 1], zs[i + 1], tol)
        if mag[i, s] < bz:
            z, bz = zs[i], float(mag[i, s])
        d[s], b[s], ok[s] = z - film_top, bz, True
    return d, b, ok


def _simplex(seed, size):
    sim = np.tile(seed, (4, 1)).astype(float)
    for k in range(3):
        sim[k + 1, k] += size
    return sim


def newton_polish(field, points, max_iter: int = 40, xtol: float = 1e-10,
                  btol: float = 1e-13, max_step: float | None = None):
    """Levenberg-Marquardt on B(r) = 0 (least squares), all points in lockstep.

    Converges quadratically onto field zeros and onto the minimum of |B|^2
    when the minimum is non-zero.  Returns (points, |B|, converged, iterations).
    """
    model = ensure_model(field)
    r = np.array(points, dtype=float, copy=True)
    B = model.field(r)
    f = np.einsum("ij,ij->i", B, B)
    lam = np.full(len(r), 1e-3)
    done = f <= btol**2
    it = 0
    for it in range(1, max_iter + 1):
        act = np.nonzero(~done)[0]
        if act.size == 0:
            break
        J = model.jacobian(r[act])
        Ba = B[act]
        JtJ = np.einsum("nki,nkj->nij", J, J)
        g = np.einsum("nki,nk->ni", J, Ba)
        scale = np.trace(JtJ, axis1=1, axis2=2)[:, None, None] / 3.0 + 1e-300
        A = JtJ + lam[act, None, None] * scale * np.eye(3)
        step = -np.linalg.solve(A, g[..., None])[..., 0]
        if max_step is not None:
            sn = np.linalg.norm(step, axis=1)
            big = sn > max_step
            step[big] *= (max_step / sn[big])[:, None]
        trial = r[act] + step
        Bt = model.field(trial)
        ft = np.einsum("ij,ij->i", Bt, Bt)
        better = ft < f[act]
        acc = act[better]
        r[acc], B[acc], f[acc] = trial[better], Bt[better], ft[better]
        lam[acc] = np.maximum(lam[acc] / 3.0, 1e-12)
        rej = act[~better]
        lam[rej] *= 4.0
        small = np.linalg.norm(step, axis=1) < xtol
        done[act[small]] = True
        done[f <= btol**2] = True
        done[lam > 1e8] = True
    return r, np.sqrt(f), done, it


def refine_minimum_3d(field, seed, cell=None, xatol: float = 1e-5,
                      max_iter: int = 10_000, simplex_size: float = 0.02,
                      polish: bool = True) -> Minimum3D:
    """Nelder-Mead on |B| from ``seed`` until the simplex is below ``xatol`` um.

    ``cell = (cx, cy, half_width, pitch)`` confines the answer to the seed
    cell; leaving it raises :class:`CellEscape`.  The simplex result is then
    polished by :func:`newton_polish`, kept only if it lowers |B| without
    moving more than ``100 * xatol``.
    """
    model = ensure_model(field)
    seed = np.asarray(seed, dtype=float)

    def f(q):
        return float(np.linalg.norm(model.field(q[None])[0]))

    res = minimize(f, seed, method="Nelder-Mead",
                   options=dict(xatol=xatol, fatol=np.inf, maxiter=max_iter,
                                maxfev=4 * max_iter, initial_simplex=_simplex(seed, simplex_size)))
    if res.nit >= max_iter or not res.success:
        raise ConvergenceError(f"simplex did not converge from {seed.tolist()}: {res.message}")
    point, bmin = res.x, float(res.fun)
    if polish:
        q, b, _, _ = newton_polish(model, point[None], max_step=10 * xatol)
        if b[0] < bmin and np.linalg.norm(q[0] - point) < 100 * xatol:
            point, bmin = q[0], float(b[0])
    if cell is not None:
        _check_cell(point, cell)
    return Minimum3D(point, bmin, int(res.nit))


def _check_cell(point, cell):
    cx, cy, half, pitch = cell
    dx, dy = point[0] - cx, point[1] - cy
    if abs(dx) > half or abs(dy) > half:
        raise CellEscape(point, (int(round(dx / pitch)), int(round(dy / pitch))))
