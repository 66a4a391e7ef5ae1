"""Numerical laboratory for scattering on manifolds with warped ends."""

__version__ = "0.1.0"
