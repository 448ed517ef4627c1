"""Numerical null control of degenerate singular parabolic equations."""

__version__ = "0.1.0"
