"""Coefficient sets and growth-validation reports."""

from __future__ import annotations

from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ArrayFn = Callable[[np.ndarray], np.ndarray]


class CoefficientFamily(str, Enum):
    """Catalog ids of the built-in coefficient families."""

    SBM = "sbm"
    STEPPING_STONE = "stepping_stone"
    CONTACT_LIMIT = "contact_limit"
    KPZ = "kpz"
    BRWRE = "brwre"
    BRWRE_DUAL = "brwre_dual"


class CoefficientSet(BaseModel):
    """Drift factor b, noise amplitude sigma and their growth parameters.

    The equation's reaction term is a(u) = b(u) * u. Both callables take and
    return numpy arrays and are only evaluated at u >= 0.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    b: ArrayFn = Field(..., description="Drift factor b(u)")
    sigma: ArrayFn = Field(..., description="Noise amplitude sigma(u) >= 0")
    theta: float = Field(1.0, gt=0.0, description="Exponent in the drift lower bound")
    r: float = Field(..., gt=0.0, le=1.0, description="Exponent r in the noise upper bound")
    L_b: float = Field(0.0, ge=0.0, description="Upper bound of b")
    l_b: float = Field(0.0, ge=0.0, description="Lower-bound constant of b")
    L_sigma: float = Field(0.0, ge=0.0, description="Noise growth constant")
    label: str = Field("custom", description="Catalog id or 'custom'")

    def drift_factor(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(np.asarray(self.b(u), dtype=float), u.shape)

    def amplitude(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(np.asarray(self.sigma(u), dtype=float), u.shape)

    def reaction(self, u: np.ndarray) -> np.ndarray:
        """Return a(u) = b(u) * u."""
        return self.drift_factor(u) * np.asarray(u, dtype=float)


class ValidationReport(BaseModel):
    """Outcome of a sampled growth-condition check."""

    passed: bool = Field(..., description="True when every sampled inequality holds")
    n_samples: int = Field(..., description="Number of sampled points")
    u_max: float = Field(..., description="Right end of the sampled range")
    violated: Optional[str] = Field(None, description="Name of the first violated inequality")
    witness: Optional[float] = Field(None, description="Smallest sampled u violating it")
    margin: float = Field(0.0, description="Largest sampled violation of that inequality")
