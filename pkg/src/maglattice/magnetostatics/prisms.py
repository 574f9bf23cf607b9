"""Perforated film as a superposition of signed, z-magnetized prisms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..config import BiasField, GeometryError, LatticeSpec, spec_hash
from ..fieldmodel import FieldModel, FieldVector, as_points
from ._kernels import prism_jacobian, prism_sum


class SingularEvaluation(RuntimeError):
    """Probe sits on a prism edge even after the symmetric nudge."""


@dataclass(frozen=True)
class Prism:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    magnetization_sign: int = 1
    magnetization_magnitude: float = 1.0  # remanence B_r, G
    role: str = "solid"

    def __post_init__(self):
        if self.magnetization_sign not in (1, -1):
            raise ValueError("magnetization_sign must be +1 or -1")
        if any(not h > 0 for h in self.half_extents):
            raise ValueError(f"half extents must be positive, got {self.half_extents}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "half_extents", tuple(float(h) for h in self.half_extents))

    @classmethod
    def from_bounds(cls, lo, hi, sign=1, magnitude=1.0, role="solid"):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        return cls(tuple((lo + hi) / 2), tuple((hi - lo) / 2), sign, magnitude, role)

    @property
    def lo(self) -> np.ndarray:
        return np.subtract(self.center, self.half_extents)

    @property
    def hi(self) -> np.ndarray:
        return np.add(self.center, self.half_extents)

    @property
    def volume(self) -> float:
        hx, hy, hz = self.half_extents
        return 8.0 * hx * hy * hz

    @property
    def weight(self) -> float:
        return self.magnetization_sign * self.magnetization_magnitude / (4.0 * math.pi)

    def translated(self, d) -> "Prism":
        return Prism(tuple(np.add(self.center, d)), self.half_extents,
                     self.magnetization_sign, self.magnetization_magnitude, self.role)


@dataclass(frozen=True)
class LatticeLayout:
    """Where the holes of each block are; used for site seeding and lattice sums."""

    holes_n: int
    pitch: float
    hole_half: tuple[float, float]
    film_bottom: float
    film_top: float
    block_centers: np.ndarray  # (B, 2)
    hole_centers: np.ndarray  # (B, n, n, 2), index [block, i, j] with i along x

    @property
    def n_blocks(self) -> int:
        return self.block_centers.shape[0]


@dataclass(frozen=True, eq=False)
class PrismSet:
    prisms: tuple[Prism, ...]
    provenance: str = ""
    bias: BiasField = field(default_factory=BiasField)
    layout: LatticeLayout | None = None
    nudge: float = 1e-7  # um
    spec_digest: str = ""

    @cached_property
    def arrays(self):
        lo = np.array([p.lo for p in self.prisms], dtype=float).reshape(-1, 3)
        hi = np.array([p.hi for p in self.prisms], dtype=float).reshape(-1, 3)
        w = np.array([p.weight for p in self.prisms], dtype=float)
        return lo, hi, w

    def __len__(self):
        return len(self.prisms)

    def count(self, role: str) -> int:
        return sum(p.role == role for p in self.prisms)

    def with_bias(self, bias: BiasField) -> "PrismSet":
        return PrismSet(self.prisms, self.provenance, bias, self.layout, self.nudge, self.spec_digest)

    def translated(self, d) -> "PrismSet":
        return PrismSet(tuple(p.translated(d) for p in self.prisms), self.provenance,
                        self.bias, None, self.nudge, self.spec_digest)

    def scaled(self, factor: float) -> "PrismSet":
        """Same geometry with magnetization scaled by ``factor``."""
        prisms = tuple(Prism(p.center, p.half_extents, p.magnetization_sign,
                             p.magnetization_magnitude * factor, p.role) for p in self.prisms)
        return PrismSet(prisms, self.provenance, self.bias, self.layout, self.nudge, self.spec_digest)

    def material_indicator(self, points) -> np.ndarray:
        """Signed count of prisms strictly containing each point (1 = material, 0 = void)."""
        pts = as_points(points)
        lo, hi, _ = self.arrays
        signs = np.array([p.magnetization_sign for p in self.prisms])
        total = np.zeros(pts.shape[0])
        for k in range(len(self.prisms)):
            inside = np.all((pts > lo[k]) & (pts < hi[k]), axis=1)
            total += signs[k] * inside
        return total

    def dipole_moment(self) -> np.ndarray:
        """Total moment in G um^3 (B_r times signed volume), along z."""
        mz = sum(p.magnetization_sign * p.magnetization_magnitude * p.volume for p in self.prisms)
        return np.array([0.0, 0.0, mz])


def build_prisms(spec: LatticeSpec) -> PrismSet:
    """Decompose the chip: slab per block, negative hole prisms, wall-frame strips.

    Each block region is its ``n x n`` hole cells (holes centred in cells of
    width ``alpha_h + alpha_s``) plus an unperturbed frame of width
    ``block_gap`` on every side; blocks are tiled edge to edge.
    """
    if spec.block_gap < spec.alpha_s:
        raise GeometryError("block_gap < alpha_s: blocks overlap")
    n, p, g, m = spec.holes_n, spec.pitch, spec.block_gap, spec.blocks_m
    br = spec.remanence_Mz
    z0, tb, tw = spec.substrate_z0, spec.tau_btm, spec.tau_wall
    half_cells = n * p / 2.0
    half_block = half_cells + g
    block_pitch = 2.0 * half_block
    offs = (np.arange(m) - (m - 1) / 2.0) * block_pitch
    hole_offs = (np.arange(n) - (n - 1) / 2.0) * p

    prisms: list[Prism] = []
    block_centers = []
    hole_centers = np.empty((m * m, n, n, 2))
    for bi, bxc in enumerate(offs):
        for bj, byc in enumerate(offs):
            b = bi * m + bj
            block_centers.append((bxc, byc))
            prisms.append(Prism.from_bounds(
                (bxc - half_block, byc - half_block, z0),
                (bxc + half_block, byc + half_block, z0 + tb), 1, br, "slab"))
            for i, hx in enumerate(hole_offs):
                for j, hy in enumerate(hole_offs):
                    cx, cy = bxc + hx, byc + hy
                    hole_centers[b, i, j] = (cx, cy)
                    a = spec.alpha_h / 2.0
                    prisms.append(Prism.from_bounds(
                        (cx - a, cy - a, z0), (cx + a, cy + a, z0 + tb), -1, br, "hole"))
            if tw != tb:
                za, zb, sign = (z0 + tb, z0 + tw, 1) if tw > tb else (z0 + tw, z0 + tb, -1)
                W, L = half_block, half_cells
                strips = (
                    ((-W, -W), (W, -L)),
                    ((-W, L), (W, W)),
                    ((-W, -L), (-L, L)),
                    ((L, -L), (W, L)),
                )
                for (x1, y1), (x2, y2) in strips:
                    prisms.append(Prism.from_bounds(
                        (bxc + x1, byc + y1, za), (bxc + x2, byc + y2, zb), sign, br, "wall"))

    layout = LatticeLayout(
        holes_n=n,
        pitch=p,
        hole_half=(spec.alpha_h / 2.0, spec.alpha_h / 2.0),
        film_bottom=z0,
        film_top=z0 + tb,
        block_centers=np.array(block_centers),
        hole_centers=hole_centers,
    )
    provenance = (
        f"{m}x{m} block slab(s) of {tb} um, {n * n} holes per block as -1 prisms, "
        f"wall frame {'none' if tw == tb else ('+' if tw > tb else '-') + str(abs(tw - tb)) + ' um'}"
    )
    return PrismSet(tuple(prisms), provenance, spec.bias, layout,
                    nudge=1e-7 * spec.alpha_h, spec_digest=spec_hash(spec))


def _evaluate(kernel, pts, lo, hi, w, nudge):
    out, flags = kernel(pts, lo, hi, w)
    if flags.any():
        d = np.full(3, nudge / math.sqrt(3.0))
        idx = np.nonzero(flags)[0]
        plus, f1 = kernel(pts[idx] + d, lo, hi, w)
        minus, f2 = kernel(pts[idx] - d, lo, hi, w)
        if f1.any() or f2.any():
            raise SingularEvaluation("probe remains on a prism edge after nudging")
        out[idx] = 0.5 * (plus + minus)
    return out, flags


def prisms_field(pset: PrismSet, points, include_bias: bool = True):
    """(B, nudged_flags) for an (N, 3) array of points."""
    pts = as_points(points)
    lo, hi, w = pset.arrays
    out, flags = _evaluate(prism_sum, pts, lo, hi, w, pset.nudge)
    if include_bias:
        out += pset.bias.as_array()
    return out, flags


def prism_field(prism: Prism, p, nudge: float = 1e-7) -> FieldVector:
    """Field of a single prism (no bias) at one point."""
    pset = PrismSet((prism,), nudge=nudge)
    b, flags = prisms_field(pset, p, include_bias=False)
    return FieldVector(*b[0], nudged=bool(flags[0]))


def field_at(pset: PrismSet, p) -> FieldVector:
    b, flags = prisms_field(pset, p)
    return FieldVector(*b[0], nudged=bool(flags[0]))


def dipole_field(moment, center, points) -> np.ndarray:
    """Point-dipole field; ``moment`` in G um^3 as returned by ``dipole_moment``."""
    r = as_points(points) - np.asarray(center, float)
    rn = np.linalg.norm(r, axis=1)[:, None]
    m = np.asarray(moment, float)
    mr = (r @ m)[:, None]
    return (3.0 * r * mr / rn**5 - m / rn**3) / (4.0 * math.pi)


class PrismModel(FieldModel):
    tag = "prism"

    def __init__(self, pset: PrismSet):
        self.pset = pset
        self.length_scale = pset.layout.pitch / 2.0 if pset.layout else 1.0

    def field(self, points):
        return prisms_field(self.pset, points)[0]

    def jacobian(self, points):
        pts = as_points(points)
        lo, hi, w = self.pset.arrays
        return _evaluate(prism_jacobian, pts, lo, hi, w, self.pset.nudge)[0]
