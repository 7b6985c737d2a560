"""Numerical laboratory for two-dimensional circle-valued spin systems:
lattice geometry, singular pair interactions, layer measures, percolation
certificates, long-range walks, spin waves, and Metropolis sampling."""

__version__ = "0.1.0"
