"""Convex-hull multi-objective genetic programming for ROC performance."""

__version__ = "0.1.0"
