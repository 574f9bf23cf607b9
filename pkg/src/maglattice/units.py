"""Physical constants and unit conversions.

Lengths are carried in micrometres and fields in Gauss at every public
boundary; conversions to SI happen only where constants are applied.
"""

from scipy import constants as _c

MU_B = _c.physical_constants["Bohr magneton"][0]  # J/T
K_B = _c.k  # J/K
AMU = _c.atomic_mass  # kg
MU_0 = _c.mu_0  # T m / A

GAUSS_PER_TESLA = 1.0e4
UM_PER_M = 1.0e6


def gauss_to_tesla(b):
    return b / GAUSS_PER_TESLA


def tesla_to_gauss(b):
    return b * GAUSS_PER_TESLA


def um_to_m(x):
    return x / UM_PER_M


def m_to_um(x):
    return x * UM_PER_M


def curvature_to_si(c):
    """G/um^2 -> T/m^2."""
    return c / GAUSS_PER_TESLA * UM_PER_M**2


def kelvin_to_microkelvin(t):
    return t * 1.0e6


def remanence_to_magnetization(br_gauss):
    """Volume magnetization M = B_r / mu_0 in A/m."""
    return gauss_to_tesla(br_gauss) / MU_0
