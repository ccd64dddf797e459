"""Modular differential equations from algebraic residue systems.

Exact and high-precision verification of weight-2 meromorphic modular forms
built from solutions of the systems ``E^n_{a,b,c}``.
"""

from .series import PuiseuxSeries, DomainError, SeriesError

__version__ = "0.1.0"

__all__ = ["PuiseuxSeries", "DomainError", "SeriesError"]
