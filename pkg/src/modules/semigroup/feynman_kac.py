"""Feynman-Kac semigroup with constant potential and the domination bound."""

from __future__ import annotations

import numpy as np

from ..core.errors import DomainError, InvalidFieldError
from ..core.fields import ScalarField
from ..core.heat import heat_convolve


def feynman_kac_const(f: ScalarField, t: float, g: float) -> ScalarField:
    """Return P_t^g f = e^{g t} P_t f for a constant potential g."""
    if t < 0.0:
        raise DomainError(f"Feynman-Kac semigroup needs t >= 0, got {t}")
    smoothed = heat_convolve(f, t)
    return smoothed.with_values(np.exp(g * t) * smoothed.values)


def semigroup_bound_field(u0: ScalarField, phi_abs: ScalarField, t: float, L_b: float) -> float:
    """Return the integral of P_t^{L_b}|phi| against u0."""
    if np.any(phi_abs.values < 0.0):
        raise InvalidFieldError("domination bound needs |phi| >= 0")
    return feynman_kac_const(phi_abs, t, L_b).pair(u0)
