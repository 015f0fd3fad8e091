"""Deformations of the bivariate Chebyshev-U orthogonal polynomials."""

__version__ = "0.1.0"
