"""Grouping of sites into bands of equal trap bottom."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Band:
    band_id: int
    members: tuple[tuple[int, int, int], ...]  # site indices (block, i, j)
    representative: float  # b_min of the first member, G
    rings: tuple[int, ...]


@dataclass(frozen=True)
class BandPartition:
    bands: tuple[Band, ...]
    tolerance: float
    rings_aligned: bool  # every band is exactly a union of whole rings

    def band_of(self, index) -> int:
        for band in self.bands:
            if tuple(index) in band.members:
                return band.band_id
        raise KeyError(index)

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(("band_id", "representative_b_min_G", "size", "rings", "members"))
            for b in self.bands:
                wr.writerow((b.band_id, repr(b.representative), len(b.members),
                             " ".join(map(str, b.rings)),
                             " ".join(f"{k}:{i}:{j}" for k, i, j in b.members)))
        return path


def classify_bands(sites, tol: float = 0.01, assign: bool = True) -> BandPartition:
    """Greedy grouping by b_min: sorted ascending, a new band opens when a site
    is more than ``tol`` above the current band's representative.

    Sites without a finite b_min are left out.  With ``assign`` the band ids
    are written back to the sites.
    """
    if not tol >= 0:
        raise ValueError("tolerance must be non-negative")
    usable = [s for s in sites if s.b_min is not None and math.isfinite(s.b_min)]
    usable.sort(key=lambda s: (s.b_min, s.site_index))
    groups: list[list] = []
    for s in usable:
        if groups and s.b_min - groups[-1][0].b_min <= tol:
            groups[-1].append(s)
        else:
            groups.append([s])
    bands = []
    ring_bands: dict[int, set] = {}
    for k, g in enumerate(groups):
        members = tuple(sorted(s.site_index for s in g))
        rings = tuple(sorted({s.ring for s in g}))
        bands.append(Band(k, members, float(g[0].b_min), rings))
        for s in g:
            ring_bands.setdefault(s.ring, set()).add(k)
            if assign:
                s.band_id = k
    aligned = all(len(v) == 1 for v in ring_bands.values())
    return BandPartition(tuple(bands), float(tol), aligned)
