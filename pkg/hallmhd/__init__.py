"""Pseudo-spectral Hall-MHD simulator with fractional magnetic diffusion."""

__version__ = "0.1.0"
