"""Simulation and trap characterization of 2D permanent-magnet lattices."""

__version__ = "0.1.0"
