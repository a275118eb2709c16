"""Coefficient families, growth validation and regularization."""

from .models import CoefficientFamily, CoefficientSet, ValidationReport
from .growth import gamma_of, validate_growth, regularize_sigma, regularized
from .catalog import catalog
from .expressions import CompiledExpression, custom_coefficients

__all__ = [
    "CoefficientFamily",
    "CoefficientSet",
    "ValidationReport",
    "gamma_of",
    "validate_growth",
    "regularize_sigma",
    "regularized",
    "catalog",
    "CompiledExpression",
    "custom_coefficients",
]
