"""Spectral and transport computations for one-dimensional Schrodinger
operators with substitution and circle-map potentials."""

__version__ = "0.1.0"
