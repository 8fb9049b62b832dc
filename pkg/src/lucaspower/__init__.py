"""Certified resolution of L_n + L_m = p^a by Baker's method."""

__version__ = "0.1.0"
