"""Numerical laboratory for time-like surfaces whose base direction d/dz is
light-like along the surface, in static space-times L^3_1(c) x_f I."""

from .families import FamilyConfig, build_family, default_config, family_ids
from .immersion import SurfaceChart, adapted_frame, analyze
from .spaceforms import model
from .spacetime import Warping

__version__ = "0.1.0"

__all__ = [
    "FamilyConfig",
    "SurfaceChart",
    "Warping",
    "adapted_frame",
    "analyze",
    "build_family",
    "default_config",
    "family_ids",
    "model",
]
