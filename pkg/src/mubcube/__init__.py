"""Hadamard cubes and MUB-triplets: construction, verification, reconstruction and search."""

from .cube import HadamardCube, build_cube, classify, reconstruct_triplet, verify_axioms
from .errors import MubCubeError
from .hadamard import HadamardMatrix, equivalent, validate_hadamard
from .mub import MubSystem, validate_mub
from .numerics import DEFAULT_TOL, EXACT_TOL, SEARCH_TOL, Tolerance

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "EXACT_TOL",
    "HadamardCube",
    "HadamardMatrix",
    "MubCubeError",
    "MubSystem",
    "SEARCH_TOL",
    "Tolerance",
    "build_cube",
    "classify",
    "equivalent",
    "reconstruct_triplet",
    "validate_hadamard",
    "validate_mub",
    "verify_axioms",
]
