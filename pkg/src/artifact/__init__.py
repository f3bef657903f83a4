"""Exact straight lines and convexity on glued integral affine surfaces."""

__version__ = "0.1.0"
