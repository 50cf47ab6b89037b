"""Discrete anisotropic Triebel-Lizorkin sequence spaces for expansive dilations."""

from anisotl.errors import (
    CapacityError,
    IndeterminateError,
    InvalidCombination,
    InvalidInput,
    InvalidState,
    NotFound,
)
from anisotl.matrices import ExpansiveMatrix, Matrix, is_expansive
from anisotl.spaces import SpaceParams

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ExpansiveMatrix",
    "IndeterminateError",
    "InvalidCombination",
    "InvalidInput",
    "InvalidState",
    "Matrix",
    "NotFound",
    "SpaceParams",
    "is_expansive",
    "__version__",
]
