"""Equivariant gradient-like flows on torus manifolds."""

__version__ = "0.1.0"
