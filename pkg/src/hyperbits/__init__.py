"""Hyperbits: ball-valued information carriers and the protocols they stand in for."""

__version__ = "0.1.0"

from . import clifford, hyperball, infocausality, protocols, qsim, queries, tsirelson
from .exceptions import (
    DimensionMismatchError,
    HyperbitError,
    PostprocessingInfeasibleError,
    ResourceLimitError,
    UnknownInputError,
    UnsupportedFormError,
    ValidationError,
)
from .hyperball import HyperbitState, MeasurementVector
from .protocols import EBitProtocol, HyperbitProtocol, ebit_to_hyperbit, hyperbit_to_ebit
from .qsim import DensityMatrix, Observable
from .queries import EncodingScheme, QueryMatrix, hadamard

__all__ = [
    "__version__",
    "clifford",
    "hyperball",
    "infocausality",
    "protocols",
    "qsim",
    "queries",
    "tsirelson",
    "DensityMatrix",
    "Observable",
    "HyperbitState",
    "MeasurementVector",
    "EBitProtocol",
    "HyperbitProtocol",
    "ebit_to_hyperbit",
    "hyperbit_to_ebit",
    "EncodingScheme",
    "QueryMatrix",
    "hadamard",
    "HyperbitError",
    "ValidationError",
    "DimensionMismatchError",
    "ResourceLimitError",
    "UnknownInputError",
    "PostprocessingInfeasibleError",
    "UnsupportedFormError",
]
