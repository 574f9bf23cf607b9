"""Per-hole trap sites: search, refinement and full figure-of-merit table."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import RB87, AtomSpecies, LatticeSpec
from ..fieldmodel import FieldModel, ensure_model
from ..magnetostatics import LatticeSampler, PrismModel, PrismSet
from .metrics import EPS_B, barrier_heights, hessian_numeric, trap_frequency, well_depth
from .search import (
    CellEscape,
    NoInteriorMinimum,
    _check_cell,
    default_z_range,
    find_z_minimum,
    line_minima_from_samples,
    newton_polish,
    refine_minimum_3d,
)

SEED_HEIGHT = 0.7  # seed at film_top + 0.7 alpha when the axis scan fails
DIRECT_BUDGET = 5e6  # sites x prisms above which the batched path is used

SITE_COLUMNS = (
    "block", "i", "j", "ring",
    "x_um", "y_um", "d_min_um", "b_min_G",
    "dBx_G", "dBy_G", "dBz_G",
    "curv_x_G_per_um2", "curv_y_G_per_um2", "curv_z_G_per_um2",
    "nu_x_Hz", "nu_y_Hz", "nu_z_Hz",
    "nu_literal_x", "nu_literal_y", "nu_literal_z",
    "depth_uK", "band_id",
    "axis_d_min_um", "axis_b_min_G", "status",
)


def _nan3():
    return np.full(3, np.nan)


@dataclass(eq=False)
class TrapSite:
    block: int
    i: int
    j: int
    ring: int
    hole_center: tuple[float, float]
    x: float = math.nan
    y: float = math.nan
    z: float = math.nan  # absolute height
    d_min: float = math.nan  # above film top
    b_min: float = math.nan
    axis_d_min: float = math.nan  # minimum on the vertical through the hole centre
    axis_b_min: float = math.nan
    barriers: np.ndarray = field(default_factory=_nan3)
    barrier_sides: np.ndarray = field(default_factory=lambda: np.full((3, 2), np.nan))
    barrier_open: np.ndarray = field(default_factory=lambda: np.zeros((3, 2), dtype=bool))
    curvatures: np.ndarray = field(default_factory=_nan3)
    linear: np.ndarray = field(default_factory=lambda: np.ones(3, dtype=bool))
    nu_standard: np.ndarray = field(default_factory=_nan3)
    nu_literal: np.ndarray = field(default_factory=_nan3)
    depth_uK: float = math.nan
    band_id: int | None = None
    status: str = "pending"

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.d_min)

    @property
    def point(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def site_index(self) -> tuple[int, int, int]:
        return (self.block, self.i, self.j)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> list:
        def num(v):
            return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))

        def curv(k):
            return "LINEAR" if self.linear[k] and self.ok else num(self.curvatures[k])

        return [
            self.block, self.i, self.j, self.ring,
            num(self.x), num(self.y), num(self.d_min), num(self.b_min),
            *(num(v) for v in self.barriers),
            *(curv(k) for k in range(3)),
            *(num(v) for v in self.nu_standard),
            *(num(v) for v in self.nu_literal),
            num(self.depth_uK), "" if self.band_id is None else self.band_id,
            num(self.axis_d_min), num(self.axis_b_min), self.status,
        ]


def ring_index(i: int, j: int, n: int) -> int:
    """Chebyshev ring around the lattice centre (0 = centre site or central 2x2)."""
    c = (n - 1) / 2.0
    r = max(abs(i - c), abs(j - c))
    return int(r) if n % 2 else int(r - 0.5)


def _alpha(layout) -> float:
    return layout.pitch / 2.0


def _blank_sites(pset: PrismSet, indices=None) -> list[TrapSite]:
    lay = pset.layout
    n = lay.holes_n
    if indices is None:
        indices = [(b, i, j) for b in range(lay.n_blocks) for i in range(n) for j in range(n)]
    indices = sorted(set(tuple(int(v) for v in idx) for idx in indices))
    sites = []
    for b, i, j in indices:
        if not (0 <= b < lay.n_blocks and 0 <= i < n and 0 <= j < n):
            raise IndexError(f"site {(b, i, j)} outside the lattice")
        cx, cy = lay.hole_centers[b, i, j]
        sites.append(TrapSite(b, i, j, ring_index(i, j, n), (float(cx), float(cy))))
    return sites


def _axis_minima_lattice(pset, sites, z_range, tol):
    lay = pset.layout
    zs = np.linspace(*z_range, 991)
    sampler = LatticeSampler(pset)
    vals = sampler.sample(np.column_stack([np.zeros_like(zs), np.zeros_like(zs), zs]))
    flat = vals.reshape(len(zs), -1, 3)
    n = lay.holes_n
    sel = [s.block * n * n + s.i * n + s.j for s in sites]
    d, b, ok = line_minima_from_samples(zs, flat[:, sel, :], lay.film_top, tol)
    for s, dd, bb, good in zip(sites, d, b, ok):
        if good:
            s.axis_d_min, s.axis_b_min = float(dd), float(bb)


def _axis_minima_direct(model, film_top, sites, z_range, tol):
    for s in sites:
        try:
            zm = find_z_minimum(model, *s.hole_center, z_range, film_top, tol=tol)
        except NoInteriorMinimum:
            continue
        s.axis_d_min, s.axis_b_min = zm.d_min, zm.b_min


def _seed(s: TrapSite, film_top: float, alpha: float) -> np.ndarray:
    z = film_top + (s.axis_d_min if not math.isnan(s.axis_d_min) else SEED_HEIGHT * alpha)
    return np.array([s.hole_center[0], s.hole_center[1], z])


def _cell(s: TrapSite, pitch: float):
    return (s.hole_center[0], s.hole_center[1], pitch / 2.0, pitch)


def _set_min(s: TrapSite, point, bmin, film_top):
    s.x, s.y, s.z = (float(v) for v in point)
    s.d_min = s.z - film_top
    s.b_min = float(bmin)
    s.status = "ok"


def _refine_one(model, s, film_top, alpha, pitch, xatol):
    zmax = film_top + 5.0 * alpha
    try:
        res = refine_minimum_3d(model, _seed(s, film_top, alpha), cell=_cell(s, pitch),
                                xatol=xatol, simplex_size=0.02 * alpha)
    except CellEscape as exc:
        if exc.point[2] > zmax:
            s.status = "failed: no bounded minimum below film_top + 5 alpha"
        else:
            s.status = f"escaped: nearest cell offset {exc.nearest_cell}"
        return
    except Exception as exc:  # per-site failures are recorded, not raised
        s.status = f"failed: {exc}"
        return
    if res.point[2] <= film_top:
        s.status = "failed: minimum below the film top"
        return
    if res.point[2] > zmax:
        s.status = "failed: no bounded minimum below film_top + 5 alpha"
        return
    _set_min(s, res.point, res.b_min, film_top)


def _refine_batched(model, sites, film_top, alpha, pitch):
    seeds = np.array([_seed(s, film_top, alpha) for s in sites])
    pts, mag, conv, _ = newton_polish(model, seeds, max_iter=60, xtol=1e-9,
                                      max_step=0.1 * alpha)
    for s, p, b, c in zip(sites, pts, mag, conv):
        if not c:
            s.status = "failed: Levenberg-Marquardt did not converge"
            continue
        try:
            _check_cell(p, _cell(s, pitch))
        except CellEscape as exc:
            s.status = f"escaped: nearest cell offset {exc.nearest_cell}"
            continue
        if p[2] <= film_top:
            s.status = "failed: minimum below the film top"
            continue
        _set_min(s, p, b, film_top)


def site_metrics(model: FieldModel, s: TrapSite, film_top: float, alpha: float, pitch: float,
                 atom: AtomSpecies = RB87, eps_b: float = EPS_B) -> None:
    """Fill barriers, curvatures, frequencies and depth of a converged site."""
    p = s.point
    for k in range(3):
        if k < 2:
            bar = barrier_heights(model, p, k, s.b_min, period=pitch)
        else:
            bar = barrier_heights(model, p, 2, s.b_min, period=5.0 * alpha,
                                  lower=film_top, upper=film_top + 5.0 * alpha)
        s.barriers[k] = bar.delta
        s.barrier_sides[k] = (bar.left, bar.right)
        s.barrier_open[k] = (bar.open_left, bar.open_right)
    curv = hessian_numeric(model, p, alpha=alpha, eps_b=eps_b)
    s.curvatures, s.linear = curv.values, curv.linear
    beta = math.pi / (alpha * 1e-6)
    for k in range(3):
        if not s.linear[k] and s.curvatures[k] > 0:
            fr = trap_frequency(s.curvatures[k], atom, beta)
            s.nu_standard[k], s.nu_literal[k] = fr.standard_hz, fr.literal_value
    closed = s.barriers[np.isfinite(s.barriers)]
    if closed.size:
        s.depth_uK = well_depth(max(float(closed.min()), 0.0), atom)


def extract_sites(pset: PrismSet, spec: LatticeSpec | None = None, *, field=None,
                  method: str = "auto", metrics: bool = True, indices=None,
                  atom: AtomSpecies = RB87, xatol: float = 1e-5, tol_z: float = 1e-4,
                  workers: int = 1) -> list[TrapSite]:
    """One trap per hole, ordered by (block, i, j).

    Each site is seeded on the vertical through its hole centre at the
    minimum of that line (or ``film_top + 0.7 alpha`` when the line has no
    interior minimum) and refined in 3D.  ``method`` chooses per-site simplex
    descent ("direct"), lockstep Levenberg-Marquardt with lattice-sum axis
    scans ("lattice"), or picks by problem size ("auto").  ``field`` swaps in
    another field model for the searches.  Failures land in ``status``.
    """
    if pset.layout is None:
        raise ValueError("site extraction needs a PrismSet built from a LatticeSpec")
    lay = pset.layout
    alpha, pitch, top = _alpha(lay), lay.pitch, lay.film_top
    if spec is not None and abs(spec.film_top - top) > 1e-12:
        raise ValueError("spec does not match the prism set")
    model = PrismModel(pset) if field is None else ensure_model(field)
    sites = _blank_sites(pset, indices)
    if method == "auto":
        method = "direct" if len(sites) * len(pset) <= DIRECT_BUDGET or field is not None else "lattice"
    if method not in ("direct", "lattice"):
        raise ValueError(f"unknown method {method!r}")
    z_range = default_z_range(top, alpha)

    if method == "lattice" and field is None:
        _axis_minima_lattice(pset, sites, z_range, tol_z)
    else:
        _axis_minima_direct(model, top, sites, z_range, tol_z)

    if method == "direct":
        def work(s):
            _refine_one(model, s, top, alpha, pitch, xatol)
            if metrics and s.ok:
                site_metrics(model, s, top, alpha, pitch, atom)

        _run(work, sites, workers)
    else:
        _refine_batched(model, sites, top, alpha, pitch)
        if metrics:
            _run(lambda s: s.ok and site_metrics(model, s, top, alpha, pitch, atom), sites, workers)
    return sites


def _run(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, items))
    else:
        for it in items:
            fn(it)


def is_local_minimum(field, point, b_min: float | None = None, step: float = 1e-2) -> bool:
    """|B| at the six axis neighbours at distance ``step`` exceeds the value at ``point``."""
    model = ensure_model(field)
    p = np.asarray(point, dtype=float)
    nb = np.repeat(p[None], 6, axis=0)
    for k in range(3):
        nb[2 * k, k] += step
        nb[2 * k + 1, k] -= step
    b0 = float(model.magnitude(p[None])[0]) if b_min is None else b_min
    return bool(np.all(model.magnitude(nb) > b0))


def site_lookup(sites) -> dict:
    return {s.site_index: s for s in sites}


def write_sites_csv(sites, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SITE_COLUMNS)
        for s in sites:
            wr.writerow(s.row())
    return path
