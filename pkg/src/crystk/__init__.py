"""Exact crystallographic-group computations: point groups, cells, lines and K-theory assembly."""

__version__ = "0.1.0"
