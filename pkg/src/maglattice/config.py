"""Lattice description, scenario documents and wall classification.

A scenario document is flat ``key = value`` text, one key per line, ``#``
starting a comment.  The 11x11 reference scenario reads::

    holes_n     = 11
    blocks_m    = 1
    Mz_gauss    = 2000
    tau_btm_um  = 2
    tau_wall_um = 1
    alpha_h_um  = 1
    alpha_s_um  = 1
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .units import AMU


class ConfigError(ValueError):
    """Malformed or invalid scenario description."""


class GeometryError(ConfigError):
    """Geometric constraint violated (e.g. overlapping blocks)."""


@dataclass(frozen=True)
class BiasField:
    """Uniform external field in Gauss; negative ``bz`` points down."""

    bx: float = 0.0
    by: float = 0.0
    bz: float = 0.0

    def __post_init__(self):
        for name in ("bx", "by", "bz"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"bias component {name} is not finite: {v!r}")
            object.__setattr__(self, name, float(v))

    def as_array(self) -> np.ndarray:
        return np.array([self.bx, self.by, self.bz], dtype=float)

    @property
    def is_zero(self) -> bool:
        return self.bx == 0.0 and self.by == 0.0 and self.bz == 0.0


ZERO_BIAS = BiasField()


@dataclass(frozen=True)
class AtomSpecies:
    lande_gF: float
    mF: int
    mass: float  # kg
    name: str = ""

    @property
    def gF_mF(self) -> float:
        return self.lande_gF * self.mF

    @property
    def is_low_field_seeker(self) -> bool:
        return self.gF_mF > 0


RB87 = AtomSpecies(lande_gF=0.5, mF=2, mass=86.909180527 * AMU, name="87Rb F=2 mF=2")


class WallCondition(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    SURFACE_EQUAL = "surface_equal"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and magnetization of a perforated film chip.

    All lengths in um, fields in G.  ``remanence_Mz`` is the remanent
    induction B_r of the film.  ``tau_wall`` is the absolute thickness of the
    unperturbed frame around each block, ``block_gap`` its width.
    """

    holes_n: int
    alpha_h: float
    alpha_s: float
    tau_btm: float
    tau_wall: float
    remanence_Mz: float
    blocks_m: int = 1
    block_gap: float | None = None
    bias: BiasField = field(default_factory=BiasField)
    substrate_z0: float = 0.0

    def __post_init__(self):
        if self.block_gap is None:
            object.__setattr__(self, "block_gap", self.alpha_s)
        for name in ("holes_n", "blocks_m"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            if v < 1:
                raise ConfigError(f"{name} must be >= 1, got {v!r}")
            object.__setattr__(self, name, int(v))
        for name in ("alpha_h", "alpha_s", "tau_btm", "tau_wall", "block_gap", "remanence_Mz"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ConfigError(f"{name} is not finite")
            if v <= 0:
                raise ConfigError(f"non-positive length: {name} = {v!r}")
            object.__setattr__(self, name, v)
        if not math.isfinite(self.substrate_z0):
            raise ConfigError("substrate_z0 is not finite")
        object.__setattr__(self, "substrate_z0", float(self.substrate_z0))
        if self.block_gap < self.alpha_s:
            raise GeometryError(
                f"block_gap {self.block_gap} < alpha_s {self.alpha_s}: blocks would overlap"
            )

    @property
    def pitch(self) -> float:
        """Hole-to-hole period."""
        return self.alpha_h + self.alpha_s

    @property
    def film_top(self) -> float:
        return self.substrate_z0 + self.tau_btm

    @property
    def block_width(self) -> float:
        """Width of one block region: hole cells plus the frame on both sides."""
        return self.holes_n * self.pitch + 2.0 * self.block_gap

    def replace(self, **changes) -> "LatticeSpec":
        if "block_gap" not in changes and self.block_gap == self.alpha_s:
            changes["block_gap"] = None  # default gap follows alpha_s
        return replace(self, **changes)


# config key -> (attribute, kind)
_KEYS = {
    "blocks_m": ("blocks_m", int),
    "holes_n": ("holes_n", int),
    "alpha_h_um": ("alpha_h", float),
    "alpha_s_um": ("alpha_s", float),
    "tau_btm_um": ("tau_btm", float),
    "tau_wall_um": ("tau_wall", float),
    "block_gap_um": ("block_gap", float),
    "Mz_gauss": ("remanence_Mz", float),
    "bias_x_gauss": ("bx", float),
    "bias_y_gauss": ("by", float),
    "bias_z_gauss": ("bz", float),
    "substrate_z0_um": ("substrate_z0", float),
}
CONFIG_KEYS = tuple(_KEYS)
REQUIRED_KEYS = ("holes_n", "alpha_h_um", "alpha_s_um", "tau_btm_um", "tau_wall_um", "Mz_gauss")


def _coerce(key, raw):
    kind = _KEYS[key][1]
    if isinstance(raw, str):
        raw = raw.strip()
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse number from {raw!r}") from None
    else:
        val = raw
    if kind is int:
        if float(val) != int(float(val)):
            raise ConfigError(f"{key} must be an integer, got {raw!r}")
        return int(float(val))
    return float(val)


def spec_from_dict(values: dict) -> LatticeSpec:
    """Build a validated spec from a mapping keyed by config names."""
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    kw = {}
    bias = {}
    for key, raw in values.items():
        attr = _KEYS[key][0]
        v = _coerce(key, raw)
        if attr in ("bx", "by", "bz"):
            bias[attr] = v
        else:
            kw[attr] = v
    kw["bias"] = BiasField(**bias)
    return LatticeSpec(**kw)


def spec_to_dict(spec: LatticeSpec) -> dict:
    out = {}
    for key, (attr, _) in _KEYS.items():
        if attr in ("bx", "by", "bz"):
            out[key] = getattr(spec.bias, attr)
        else:
            out[key] = getattr(spec, attr)
    return out


def parse_kv(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val
    return values


def parse_spec(text: str) -> LatticeSpec:
    """Parse a scenario document into a validated :class:`LatticeSpec`."""
    return spec_from_dict(parse_kv(text))


def load_spec(path) -> LatticeSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def render_spec(spec: LatticeSpec) -> str:
    """Canonical document; ``parse_spec(render_spec(s)) == s``."""
    lines = []
    for key, val in spec_to_dict(spec).items():
        lines.append(f"{key} = {val!r}")
    return "\n".join(lines) + "\n"


def spec_hash(spec: LatticeSpec) -> str:
    return hashlib.sha256(render_spec(spec).encode("utf-8")).hexdigest()


def classify_wall(spec: LatticeSpec) -> WallCondition:
    if spec.tau_wall > spec.tau_btm:
        return WallCondition.POSITIVE
    if spec.tau_wall < spec.tau_btm:
        return WallCondition.NEGATIVE
    return WallCondition.SURFACE_EQUAL


TABLE1_DOCUMENT = """\
# reference scenario (11x11 holes, 2 kG film)
blocks_m    = 1
holes_n     = 11
Mz_gauss    = 2000
tau_btm_um  = 2
tau_wall_um = 1
alpha_h_um  = 1
alpha_s_um  = 1
"""


def table1_spec() -> LatticeSpec:
    return parse_spec(TABLE1_DOCUMENT)
