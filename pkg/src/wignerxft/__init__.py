"""Wigner phase-space Monte Carlo for heat exchange between two Gaussian thermal oscillators."""

__version__ = "0.1.0"
