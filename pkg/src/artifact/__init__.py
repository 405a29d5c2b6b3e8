"""Exact verification toolkit for rank-one p-adic harmonic analysis."""

__version__ = "0.1.0"
