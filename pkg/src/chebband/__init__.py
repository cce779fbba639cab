"""Weighted Chebyshev polynomials on several intervals: potential theory, asymptotics and a Remez oracle."""

from .domain import IntervalSystem, validate_system

__all__ = ["IntervalSystem", "validate_system"]
__version__ = "0.1.0"
