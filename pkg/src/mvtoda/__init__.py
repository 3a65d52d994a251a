"""Matrix-valued orthogonal polynomials for deformed weights, their banded
difference operators and the Toda-type flows they satisfy."""
from __future__ import annotations

__version__ = "0.1.0"

from .diffop import BandedDifferenceOperator, compose, compute_g
from .errors import (
    ConfigError,
    ConsistencyError,
    ContractError,
    DimensionError,
    DomainError,
    IllConditionedError,
    MvtodaError,
    ParameterError,
    QuadratureAccuracyError,
    SingularMatrixError,
    WindowError,
)
from .hermite import HermiteParams, hermite_weight
from .mvop import MvopFamily, build_family
from .polynomial import MatrixPolynomial
from .toda import LatticeState, integrate, toda_rhs
from .weight import WeightSpec

__all__ = [
    "__version__",
    "BandedDifferenceOperator", "compose", "compute_g",
    "ConfigError", "ConsistencyError", "ContractError", "DimensionError", "DomainError",
    "IllConditionedError", "MvtodaError", "ParameterError", "QuadratureAccuracyError",
    "SingularMatrixError", "WindowError",
    "HermiteParams", "hermite_weight",
    "MvopFamily", "build_family",
    "MatrixPolynomial",
    "LatticeState", "integrate", "toda_rhs",
    "WeightSpec",
]
