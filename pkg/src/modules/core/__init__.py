"""Grids, sampled fields and Gaussian heat-kernel primitives."""

from .errors import (
    SlabLabError,
    InvalidFieldError,
    DomainError,
    SingularityError,
    ConfigurationError,
    NumericError,
    ReplicaError,
    MissingArtifactError,
    SuiteMismatchError,
    InsufficientDataError,
    ConvergenceError,
)
from .grid import GridSpec, TimeGrid
from .fields import ScalarField, integrate, rap_norm, gaussian_density
from .heat import heat_kernel, heat_convolve, kernel_weights

__all__ = [
    "SlabLabError",
    "InvalidFieldError",
    "DomainError",
    "SingularityError",
    "ConfigurationError",
    "NumericError",
    "ReplicaError",
    "MissingArtifactError",
    "SuiteMismatchError",
    "InsufficientDataError",
    "ConvergenceError",
    "GridSpec",
    "TimeGrid",
    "ScalarField",
    "integrate",
    "rap_norm",
    "gaussian_density",
    "heat_kernel",
    "heat_convolve",
    "kernel_weights",
]
