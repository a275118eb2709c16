"""Gaussian heat kernel p_t(x) and the heat semigroup on grid fields."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

from .errors import DomainError, SingularityError
from .fields import ScalarField

# Kernel window half-width in units of sqrt(t); the discarded tail is below 1e-14.
KERNEL_WINDOW = 8.0


def heat_kernel(t: float, x: float | np.ndarray) -> float | np.ndarray:
    """Return p_t(x) = exp(-x^2 / 2t) / sqrt(2 pi t), with p_t = 0 for t <= 0.

    The kernel is undefined at (t, x) = (0, 0).
    """
    x = np.asarray(x, dtype=float)
    if t > 0.0:
        out = np.exp(-(x**2) / (2.0 * t)) / np.sqrt(2.0 * np.pi * t)
    else:
        if t == 0.0 and np.any(x == 0.0):
            raise SingularityError("heat kernel evaluated at t=0, x=0")
        out = np.zeros_like(x)
    return float(out) if out.ndim == 0 else out


def kernel_weights(t: float, dx: float) -> np.ndarray:
    """Discrete weights p_t(k dx) dx for |k dx| <= 8 sqrt(t), normalised to unit sum."""
    half = int(np.ceil(KERNEL_WINDOW * np.sqrt(t) / dx))
    offsets = np.arange(-half, half + 1) * dx
    weights = heat_kernel(t, offsets) * dx
    return weights / weights.sum()


def heat_convolve(f: ScalarField, t: float) -> ScalarField:
    """Return P_t f by direct Gaussian convolution, zero-padded outside the grid."""
    if t < 0.0:
        raise DomainError(f"heat semigroup needs t >= 0, got {t}")
    if t == 0.0:
        return f
    values = convolve1d(f.values, kernel_weights(t, f.grid.dx), mode="constant", cval=0.0)
    return f.with_values(values)
