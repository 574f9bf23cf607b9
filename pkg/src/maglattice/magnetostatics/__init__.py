"""Exact fields of the finite perforated film by prism superposition."""

from .grid import GRID_COLUMNS, FieldGrid, field_grid
from .lattice_sum import LatticeSampler
from .prisms import (
    LatticeLayout,
    Prism,
    PrismModel,
    PrismSet,
    SingularEvaluation,
    build_prisms,
    dipole_field,
    field_at,
    prism_field,
    prisms_field,
)

__all__ = [
    "GRID_COLUMNS",
    "FieldGrid",
    "LatticeLayout",
    "LatticeSampler",
    "Prism",
    "PrismModel",
    "PrismSet",
    "SingularEvaluation",
    "build_prisms",
    "dipole_field",
    "field_at",
    "field_grid",
    "prism_field",
    "prisms_field",
]
