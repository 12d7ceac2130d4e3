"""Numerical verification of the large-p expansion of log Z_p for Slater
determinants of holomorphic sections on the sphere and on elliptic curves."""

__version__ = "0.1.0"

from .geometry import SurfaceScenario, build_scenario
from .special import NumericalResolutionError, PrecisionCtx, PrecisionError

__all__ = ["SurfaceScenario", "build_scenario", "PrecisionCtx", "PrecisionError", "NumericalResolutionError", "__version__"]
