"""Numerical laboratory for bi-Lipschitz conjugacies of circle and interval maps."""

__version__ = "0.1.0"
