"""Trap figures of merit: curvature, frequency, depth, barriers, tilt."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..config import RB87, AtomSpecies
from ..fieldmodel import ensure_model
from ..units import K_B, MU_B, curvature_to_si, gauss_to_tesla, kelvin_to_microkelvin
from .search import golden_section

EPS_B = 1e-6  # G
NON_STANDARD = "NON-STANDARD-DIMENSIONS"


class StepUnderflow(ValueError):
    pass


class Curvature(NamedTuple):
    values: np.ndarray  # (3,) G/um^2, NaN where linear
    linear: np.ndarray  # (3,) bool


class TrapFrequency(NamedTuple):
    standard_hz: float
    literal_value: float
    literal_label: str = NON_STANDARD


class Barrier(NamedTuple):
    delta: float  # two-sided escape barrier, G (NaN when both sides open)
    left: float  # one-sided |B|max - b_min, NaN if open
    right: float
    open_left: bool
    open_right: bool
    left_pos: float  # coordinate of the bracketing maximum along the axis
    right_pos: float


_AXES = {"x": 0, "y": 1, "z": 2}


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        try:
            return _AXES[axis.lower()]
        except KeyError:
            raise ValueError(f"unknown axis {axis!r}") from None
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis {axis!r}")
    return int(axis)


def hessian_numeric(field, p, h: float | None = None, alpha: float = 1.0,
                    eps_b: float = EPS_B, drift: float = 0.1) -> Curvature:
    """Per-axis d^2|B|/dk^2 from central differences with Richardson extrapolation.

    Default step is ``1e-3 * alpha``.  An axis is flagged linear when |B| at
    ``p`` is below ``eps_b`` or the h and h/2 estimates differ by more than
    ``drift`` (relative), as happens at a conical zero.
    """
    model = ensure_model(field)
    p = np.asarray(p, dtype=float)
    h = 1e-3 * alpha if h is None else float(h)
    if not h > 1e-12 * (1.0 + float(np.max(np.abs(p)))):
        raise StepUnderflow(f"finite-difference step {h} underflows at {p.tolist()}")
    offs = []
    for k in range(3):
        for s in (h, -h, h / 2, -h / 2):
            q = p.copy()
            q[k] += s
            offs.append(q)
    pts = np.vstack([p[None], np.array(offs)])
    mag = model.magnitude(pts)
    b0 = mag[0]
    vals = np.full(3, np.nan)
    linear = np.ones(3, dtype=bool)
    if b0 < eps_b:
        return Curvature(vals, linear)
    for k in range(3):
        fp, fm, hp, hm = mag[1 + 4 * k:5 + 4 * k]
        d1 = (fp - 2 * b0 + fm) / h**2
        d2 = (hp - 2 * b0 + hm) / (h / 2) ** 2
        if abs(d2 - d1) > drift * max(abs(d2), 1e-300):
            continue
        vals[k] = (4.0 * d2 - d1) / 3.0
        linear[k] = False
    return Curvature(vals, linear)


def trap_frequency(curvature: float, atom: AtomSpecies = RB87, beta: float | None = None) -> TrapFrequency:
    """Harmonic frequency for curvature in G/um^2.

    ``standard_hz`` is (1/2pi) sqrt(mu_B gF mF B'' / m).  ``literal_value`` is
    the printed form (beta/2pi) sqrt(mu_B gF mF B'') evaluated in SI, which has no
    consistent frequency dimension; it is reported only for comparison.
    """
    if not curvature > 0:
        raise ValueError(f"curvature must be positive, got {curvature}")
    gm = atom.gF_mF
    if gm == 0:
        return TrapFrequency(0.0, 0.0)
    if gm < 0:
        raise ValueError("high-field seeker: no trapping at a field minimum")
    k = MU_B * gm * curvature_to_si(curvature)  # J/m^2
    standard = math.sqrt(k / atom.mass) / (2.0 * math.pi)
    literal = math.nan if beta is None else (beta / (2.0 * math.pi)) * math.sqrt(k)
    return TrapFrequency(standard, literal)


def well_depth(dB: float, atom: AtomSpecies = RB87) -> float:
    """Depth in uK of a well with barrier ``dB`` gauss."""
    if dB < 0:
        raise ValueError(f"barrier must be non-negative, got {dB}")
    return kelvin_to_microkelvin(MU_B * atom.gF_mF * gauss_to_tesla(dB) / K_B)


def _first_max(f):
    # index of the first interior local maximum, or None
    up = np.diff(f)
    for i in range(1, len(f) - 1):
        if up[i - 1] >= 0 and up[i] < 0:
            return i
    return None


def barrier_heights(field, point, axis, b_min: float | None = None, period: float = 1.0,
                    lower: float | None = None, upper: float | None = None,
                    samples: int = 400, tol: float = 1e-6) -> Barrier:
    """Escape barrier along ``axis`` through a trap at ``point``.

    Each direction is scanned over one ``period`` (clipped to ``lower`` /
    ``upper`` when given, e.g. the film top for z) up to the first local
    maximum of |B|, which is then refined by golden section.  A direction
    without a bracketed maximum is open.  The escape barrier is the smaller
    closed side minus ``b_min``.
    """
    model = ensure_model(field)
    k = _axis_index(axis)
    p = np.asarray(point, dtype=float)
    if b_min is None:
        b_min = float(model.magnitude(p[None])[0])
    heights, pos, opened = [], [], []
    for sign in (-1.0, 1.0):
        reach = period
        if sign < 0 and lower is not None:
            reach = min(reach, p[k] - lower)
        if sign > 0 and upper is not None:
            reach = min(reach, upper - p[k])
        if reach <= 0:
            heights.append(math.nan), pos.append(math.nan), opened.append(True)
            continue
        t = np.linspace(0.0, reach, samples + 1)
        pts = np.repeat(p[None], len(t), axis=0)
        pts[:, k] += sign * t
        mag = model.magnitude(pts)
        i = _first_max(mag)
        if i is None:
            heights.append(math.nan), pos.append(math.nan), opened.append(True)
            continue

        def neg(s):
            q = p.copy()
            q[k] += sign * s
            return -float(model.magnitude(q[None])[0])

        s, fneg = golden_section(neg, t[i - 1], t[i + 1], tol)
        bmax = max(-fneg, float(mag[i]))
        heights.append(bmax - b_min)
        pos.append(p[k] + sign * s)
        opened.append(False)
    closed = [hgt for hgt, o in zip(heights, opened) if not o]
    delta = min(closed) if closed else math.nan
    return Barrier(delta, heights[0], heights[1], opened[0], opened[1], pos[0], pos[1])


def tilt(a, b, atom: AtomSpecies = RB87) -> tuple[float, float]:
    """Tilt between two sites (TrapSite or bare b_min values) as (gauss, uK)."""
    dv = abs(float(getattr(a, "b_min", a)) - float(getattr(b, "b_min", b)))
    return dv, well_depth(dv, atom)
