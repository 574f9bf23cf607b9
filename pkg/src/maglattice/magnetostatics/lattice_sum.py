"""Exact field at the same offset from every hole of a block, via box sums.

All holes of a block are identical prisms on a regular grid, so the hole
contribution at ``hole_center[i, j] + d`` is the sum of a single-hole kernel
``K[a, b] = h(d + ((a - n + 1) p, (b - n + 1) p))`` over an ``n x n`` window
starting at ``(i, j)``.  Summed-area tables give all ``n^2`` windows at once;
cost per offset is one kernel on ``(2n - 1)^2`` points instead of ``n^4``
prism evaluations.  Other prisms (slabs, walls, holes of other blocks) are
summed directly.
"""

from __future__ import annotations

import numpy as np

from ._kernels import prism_sum
from .prisms import PrismSet, _evaluate


def _box_sums(kernel, n):
    # kernel (..., 2n-1, 2n-1, 3) -> windowed sums (..., n, n, 3)
    c = np.zeros(kernel.shape[:-3] + (kernel.shape[-3] + 1, kernel.shape[-2] + 1, 3))
    c[..., 1:, 1:, :] = kernel.cumsum(axis=-3).cumsum(axis=-2)
    return c[..., n:, n:, :] - c[..., :-n, n:, :] - c[..., n:, :-n, :] + c[..., :-n, :-n, :]


class LatticeSampler:
    def __init__(self, pset: PrismSet):
        if pset.layout is None:
            raise ValueError("lattice sums need a PrismSet built from a LatticeSpec")
        self.pset = pset
        lay = pset.layout
        self.layout = lay
        n = lay.holes_n
        lo, hi, w = pset.arrays
        holes = np.array([p.role == "hole" for p in pset.prisms])
        hole_lo, hole_hi, hole_w = lo[holes], hi[holes], w[holes]
        self.n_blocks = lay.n_blocks
        per_block = n * n
        # one representative hole, centred at the origin in x, y
        self._k_lo = np.array([[-lay.hole_half[0], -lay.hole_half[1], hole_lo[0, 2]]])
        self._k_hi = np.array([[lay.hole_half[0], lay.hole_half[1], hole_hi[0, 2]]])
        self._k_w = hole_w[:1]
        rel = (np.arange(2 * n - 1) - (n - 1)) * lay.pitch
        self._rel = np.stack(np.meshgrid(rel, rel, indexing="ij"), axis=-1)  # (2n-1, 2n-1, 2)
        # prisms summed directly, per block: non-holes plus holes of other blocks
        hole_idx = np.nonzero(holes)[0]
        self._direct = []
        for b in range(self.n_blocks):
            own = hole_idx[b * per_block:(b + 1) * per_block]
            keep = np.setdiff1d(np.arange(len(pset.prisms)), own)
            self._direct.append((lo[keep], hi[keep], w[keep]))

    @property
    def site_shape(self):
        n = self.layout.holes_n
        return (self.n_blocks, n, n)

    def sample(self, offsets, chunk: int = 32) -> np.ndarray:
        """B (bias included) at hole_center + (dx, dy) and absolute height z.

        ``offsets`` is (K, 3) of (dx, dy, z); returns (K, B, n, n, 3).
        """
        offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
        n = self.layout.holes_n
        K = offsets.shape[0]
        out = np.empty((K,) + self.site_shape + (3,))
        m = 2 * n - 1
        for s in range(0, K, chunk):
            off = offsets[s:s + chunk]
            kp = np.empty((off.shape[0], m, m, 3))
            kp[..., :2] = off[:, None, None, :2] + self._rel[None]
            kp[..., 2] = off[:, None, None, 2]
            kern, _ = _evaluate(prism_sum, kp.reshape(-1, 3), self._k_lo, self._k_hi,
                                self._k_w, self.pset.nudge)
            sums = _box_sums(kern.reshape(off.shape[0], m, m, 3), n)
            for b in range(self.n_blocks):
                out[s:s + chunk, b] = sums
        centers = self.layout.hole_centers  # (B, n, n, 2)
        for b in range(self.n_blocks):
            pts = np.empty((K, n, n, 3))
            pts[..., :2] = offsets[:, None, None, :2] + centers[b][None]
            pts[..., 2] = offsets[:, None, None, 2]
            lo, hi, w = self._direct[b]
            direct, _ = _evaluate(prism_sum, pts.reshape(-1, 3), lo, hi, w, self.pset.nudge)
            out[:, b] += direct.reshape(K, n, n, 3)
        out += self.pset.bias.as_array()
        return out
