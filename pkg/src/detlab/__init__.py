"""Numerical laboratory for the Euler-Lagrange system div(h(det Du) cof Du) = 0."""

__version__ = "0.1.0"
