"""Desk-scale numerical checks of information-theoretic limits of adaptive control
and system identification."""

__version__ = "0.1.0"
