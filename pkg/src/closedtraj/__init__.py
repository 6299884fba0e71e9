"""Pseudo-orbits and averaging-theory limit cycles for ``z''' + a z'' + b z' + abz = eps F``."""

from .model import Params, RegionLabel
from .averaging import AveragedPoly, MultiPoly

__version__ = "0.1.0"

__all__ = ["AveragedPoly", "MultiPoly", "Params", "RegionLabel", "__version__"]
