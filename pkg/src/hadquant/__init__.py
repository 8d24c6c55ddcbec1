"""Geometric quantiles on Hadamard manifolds."""

__version__ = "0.1.0"
