"""Computational tools around the bellows conjecture for small polyhedra."""

__version__ = "0.1.0"
