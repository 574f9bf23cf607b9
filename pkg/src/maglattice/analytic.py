"""Fourier-series field of an infinite perforated film with square holes.

The film occupies ``0 <= z <= tau``; the in-plane pattern has period
``2 * alpha`` and the model origin sits on a field maximum of B_z.  Only the
fundamental harmonic is kept by :func:`field_truncated`; :func:`field_series`
adds odd harmonics ``k = 3, 5, ...`` with alternating sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import BiasField, LatticeSpec
from .fieldmodel import FieldModel, FieldVector, as_points

EPS_B = 1e-6  # G, curvature singularity guard


class AnalyticDomainError(ValueError):
    """Precondition of the analytic model violated."""


class SingularCurvature(AnalyticDomainError):
    """|B| too small for the 1/B^3 curvature expressions."""


@dataclass(frozen=True)
class AnalyticParams:
    b0: float  # G
    beta: float  # 1/um
    tau: float  # um
    alpha: float  # um
    bias: BiasField = field(default_factory=BiasField)

    @property
    def b_ref(self) -> float:
        return self.b0 * -math.expm1(-self.beta * self.tau)

    @classmethod
    def from_values(cls, remanence: float, alpha: float, tau: float, bias: BiasField | None = None):
        return cls(
            b0=remanence / math.pi,
            beta=math.pi / alpha,
            tau=tau,
            alpha=alpha,
            bias=bias if bias is not None else BiasField(),
        )


@dataclass(frozen=True)
class LabeledValue:
    value: float
    label: str
    note: str = ""


@dataclass(frozen=True)
class ZeroBiasMagnitude:
    value: float  # from components
    printed: float  # literal two-term radical, audit only (NaN if radicand < 0)


def derive_params(spec: LatticeSpec) -> AnalyticParams:
    if spec.alpha_h != spec.alpha_s:
        raise AnalyticDomainError(
            f"analytic model needs alpha_h == alpha_s (got {spec.alpha_h}, {spec.alpha_s}); "
            "use the prism model for unequal hole size and spacing"
        )
    return AnalyticParams.from_values(spec.remanence_Mz, spec.alpha_h, spec.tau_btm, spec.bias)


def analytic_field(points, params: AnalyticParams, order: int = 1, include_bias: bool = True) -> np.ndarray:
    """Vectorized components, shape (N, 3)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    pts = as_points(points)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    beta, tau = params.beta, params.tau
    out = np.zeros_like(pts)
    for idx in range(order):
        k = 2 * idx + 1
        sign = -1.0 if idx % 2 else 1.0
        coef = sign * params.b0 / k * -math.expm1(-k * beta * tau)
        amp = coef * np.exp(-k * beta * (z - tau))
        out[:, 0] += amp * np.sin(k * beta * x)
        out[:, 1] += amp * np.sin(k * beta * y)
        out[:, 2] += amp * (np.cos(k * beta * x) + np.cos(k * beta * y))
    if include_bias:
        out += params.bias.as_array()
    return out


def analytic_jacobian(points, params: AnalyticParams, order: int = 1) -> np.ndarray:
    pts = as_points(points)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    beta, tau = params.beta, params.tau
    jac = np.zeros((pts.shape[0], 3, 3))
    for idx in range(order):
        k = 2 * idx + 1
        sign = -1.0 if idx % 2 else 1.0
        kb = k * beta
        amp = sign * params.b0 / k * -math.expm1(-kb * tau) * np.exp(-kb * (z - tau)) * kb
        sx, cx = np.sin(kb * x), np.cos(kb * x)
        sy, cy = np.sin(kb * y), np.cos(kb * y)
        jac[:, 0, 0] += amp * cx
        jac[:, 0, 2] -= amp * sx
        jac[:, 1, 1] += amp * cy
        jac[:, 1, 2] -= amp * sy
        jac[:, 2, 0] -= amp * sx
        jac[:, 2, 1] -= amp * sy
        jac[:, 2, 2] -= amp * (cx + cy)
    return jac


def _vector(p, params, order):
    pts = as_points(p)
    if pts.shape[0] != 1:
        raise ValueError("expected a single point")
    b = analytic_field(pts, params, order)[0]
    return FieldVector(b[0], b[1], b[2], extrapolated=bool(pts[0, 2] < params.tau))


def field_truncated(p, params: AnalyticParams) -> FieldVector:
    """Fundamental-harmonic field plus bias at one point."""
    return _vector(p, params, 1)


def field_series(p, params: AnalyticParams, order: int) -> FieldVector:
    """Field with ``order`` odd harmonics (k = 1, 3, ..., 2*order-1)."""
    return _vector(p, params, order)


def zero_bias_magnitude(p, params: AnalyticParams) -> ZeroBiasMagnitude:
    if not params.bias.is_zero:
        raise AnalyticDomainError("zero_bias_magnitude requires zero bias")
    b = analytic_field(p, params, 1)[0]
    x, y, z = as_points(p)[0]
    radicand = 2.0 * math.cos(params.beta * x) * math.cos(params.beta * y)
    env = params.b_ref * math.exp(-params.beta * (z - params.tau))
    printed = env * math.sqrt(radicand) if radicand >= 0 else float("nan")
    return ZeroBiasMagnitude(value=math.hypot(*b), printed=printed)


def printed_magnitude_eq7(p, params: AnalyticParams) -> float:
    """Literal printed bias-included magnitude (mixes B_0^2 into bias terms); audit only."""
    x, y, z = as_points(p)[0]
    bx, by, bz = params.bias.bx, params.bias.by, params.bias.bz
    g = -math.expm1(-params.beta * params.tau)
    e = math.exp(-params.beta * (z - params.tau))
    cx, cy = math.cos(params.beta * x), math.cos(params.beta * y)
    rad = (
        bx**2 + by**2 + bz**2
        + 2 * params.b0**2 * g**2 * e**2 * cx * cy
        + 2 * params.b0**2 * g * e * ((bx + bz) * cx + (by + bz) * cy)
    )
    return math.sqrt(rad) if rad >= 0 else float("nan")


def ideal_minima_grid(params: AnalyticParams, nx_range, ny_range) -> list[tuple[float, float]]:
    """Zero-field columns of the truncated model: (nx*alpha, ny*alpha) with nx+ny odd."""
    if params.bias.bx != 0.0 or params.bias.by != 0.0:
        raise AnalyticDomainError("ideal minima are defined for zero in-plane bias")
    return [
        (nx * params.alpha, ny * params.alpha)
        for nx in nx_range
        for ny in ny_range
        if (nx + ny) % 2
    ]


def dmin_heuristic(params: AnalyticParams) -> LabeledValue:
    """Closed-form trap height estimate, kept verbatim (log of a Gauss value)."""
    bz = params.bias.bz
    if not bz > 0:
        raise AnalyticDomainError("d_min heuristic undefined for B_z bias <= 0")
    return LabeledValue(
        value=params.alpha / math.pi * math.log(params.b_ref + 1.0 / bz),
        label="HEURISTIC",
        note="dimensionally inconsistent closed form; use numeric search for d_min",
    )


def _curv(env, ca, sa, cb):
    # d2|B|/da2 for |B| = env*sqrt(2 + 2 ca cb), beta^2 applied by caller
    f = 2.0 + 2.0 * ca * cb
    return -env * cb * (ca * f + sa * sa * cb) / f**1.5


def curvature_analytic(p, params: AnalyticParams, eps_b: float = EPS_B) -> tuple[float, float]:
    """(d2|B|/dx2, d2|B|/dy2) in G/um^2 for the zero-bias truncated model."""
    if not params.bias.is_zero:
        raise AnalyticDomainError("curvature_analytic requires zero bias")
    x, y, z = as_points(p)[0]
    env = params.b_ref * math.exp(-params.beta * (z - params.tau))
    bx_, by_ = params.beta * x, params.beta * y
    cx, sx, cy, sy = math.cos(bx_), math.sin(bx_), math.cos(by_), math.sin(by_)
    mag = env * math.sqrt(max(2.0 + 2.0 * cx * cy, 0.0))
    if mag <= eps_b:
        raise SingularCurvature(f"|B| = {mag:.3g} G <= {eps_b} G; minimum is conical")
    b2 = params.beta**2
    return b2 * _curv(env, cx, sx, cy), b2 * _curv(env, cy, sy, cx)


def printed_curvature(p, params: AnalyticParams) -> tuple[float, float]:
    """Literal printed curvature expressions (audit only)."""
    x, y, z = as_points(p)[0]
    beta, bref = params.beta, params.b_ref
    mag = math.hypot(*analytic_field(p, params, 1, include_bias=False)[0])
    cx, sx = math.cos(beta * x), math.sin(beta * x)
    cy, sy = math.cos(beta * y), math.sin(beta * y)
    dxx = -(beta**2) * bref**2 * cx * (mag**2 * cx + bref * cx * sx**2) / mag**3
    dyy = -(beta**2) * bref**2 * cy * (mag**2 * cy + bref * cx * sy**2) / mag**3
    return dxx, dyy


class AnalyticModel(FieldModel):
    tag = "analytic"

    def __init__(self, params: AnalyticParams, order: int = 1, offset=(0.0, 0.0, 0.0)):
        self.params = params
        self.order = order
        self.offset = np.asarray(offset, dtype=float)  # world = model + offset
        self.length_scale = params.alpha

    def field(self, points):
        return analytic_field(as_points(points) - self.offset, self.params, self.order)

    def jacobian(self, points):
        return analytic_jacobian(as_points(points) - self.offset, self.params, self.order)


def lattice_offset(spec: LatticeSpec) -> np.ndarray:
    """World position of the analytic model origin for a centred prism lattice.

    The model origin is a B_z maximum, i.e. a material corner between four
    holes.  For even ``holes_n`` the lattice centre is such a corner; for odd
    ``holes_n`` the centre is a hole and the origin moves by half a pitch.
    The film top of both models coincides.
    """
    half = 0.0 if spec.holes_n % 2 == 0 else spec.pitch / 2.0
    return np.array([half, half, spec.substrate_z0])


def model_for_spec(spec: LatticeSpec, order: int = 1) -> AnalyticModel:
    return AnalyticModel(derive_params(spec), order=order, offset=lattice_offset(spec))
