"""Relativistic coupling of centre-of-mass and internal dynamics."""

from relmass.model import CP1, PhysicalParams, validate_params

__all__ = ["CP1", "PhysicalParams", "validate_params"]
__version__ = "0.1.0"
