"""Numerical laboratory for diffeomorphism-invariant Colombeau generalized functions."""

__version__ = "0.1.0"
