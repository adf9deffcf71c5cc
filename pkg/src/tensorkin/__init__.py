"""Exact coefficients and Monte Carlo verification of kinematic formulae for
tensorial curvature measures of convex polytopes."""

__version__ = "0.1.0"
