"""Magnetic Weyl calculus for matrix-valued and equivariant symbols on phase-space grids."""

__version__ = "0.1.0"
