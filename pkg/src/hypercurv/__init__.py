"""Prescribed m-th mean curvature radial graphs in space forms of curvature -1 and +1."""
from .conformal import ConformalGraph, from_conformal, to_conformal
from .grid import SphereGrid, build_grid
from .kernels import BACKEND
from .psi import PsiSpec
from .spaceform import RadialGraph, ShapeData, SpaceForm

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConformalGraph",
    "PsiSpec",
    "RadialGraph",
    "ShapeData",
    "SpaceForm",
    "SphereGrid",
    "build_grid",
    "from_conformal",
    "to_conformal",
]
