"""Trap search and figures of merit."""

from .bands import Band, BandPartition, classify_bands
from .metrics import (
    NON_STANDARD,
    Barrier,
    Curvature,
    StepUnderflow,
    TrapFrequency,
    barrier_heights,
    hessian_numeric,
    tilt,
    trap_frequency,
    well_depth,
)
from .search import (
    CellEscape,
    ConvergenceError,
    Minimum3D,
    NoInteriorMinimum,
    ZMinimum,
    default_z_range,
    find_z_minimum,
    golden_section,
    newton_polish,
    refine_minimum_3d,
)
from .sites import (
    SITE_COLUMNS,
    TrapSite,
    extract_sites,
    is_local_minimum,
    ring_index,
    site_lookup,
    site_metrics,
    write_sites_csv,
)

__all__ = [
    "Band", "BandPartition", "Barrier", "CellEscape", "ConvergenceError", "Curvature",
    "Minimum3D", "NON_STANDARD", "NoInteriorMinimum", "SITE_COLUMNS", "StepUnderflow",
    "TrapFrequency", "TrapSite", "ZMinimum", "barrier_heights", "classify_bands",
    "default_z_range", "extract_sites", "find_z_minimum", "golden_section",
    "hessian_numeric", "is_local_minimum", "newton_polish", "refine_minimum_3d",
    "ring_index", "site_lookup", "site_metrics", "tilt", "trap_frequency", "well_depth",
]
