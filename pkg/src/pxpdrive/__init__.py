"""Exact-diagonalization simulator for the two-rate driven PXP chain."""

__version__ = "0.1.0"
