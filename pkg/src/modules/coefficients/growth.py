"""Derived noise rate, growth validation and sigma regularization."""

from __future__ import annotations

import logging

import numpy as np

from ..core.errors import DomainError
from .models import CoefficientSet, ValidationReport

logger = logging.getLogger(__name__)

# Slack allowing equality cases of the growth bounds in floating point.
GROWTH_RTOL = 1e-12


def _nonnegative(u, what: str) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0):
        raise DomainError(f"{what} needs u >= 0")
    return u


def gamma_of(c: CoefficientSet, u):
    """Return gamma(u) = sigma(u)^2 / u for u > 0 and 0 at u = 0."""
    u = _nonnegative(u, "gamma_of")
    s2 = c.amplitude(u) ** 2
    out = np.divide(s2, u, out=np.zeros_like(u), where=u > 0.0)
    return float(out) if out.ndim == 0 else out


def validate_growth(c: CoefficientSet, u_max: float, n_samples: int = 1001) -> ValidationReport:
    """Check the drift and noise growth bounds on a uniform sample of [0, u_max].

    Inequalities are checked in the order: b finite, b <= L_b,
    b >= -l_b (u^theta + 1), sigma >= 0, sigma <= L_sigma (u^r + u).
    """
    if u_max <= 0.0:
        raise DomainError(f"u_max must be positive, got {u_max}")
    if n_samples < 100:
        raise DomainError(f"need at least 100 samples, got {n_samples}")
    u = np.linspace(0.0, u_max, n_samples)
    with np.errstate(over="ignore", invalid="ignore"):
        b = c.drift_factor(u)
        s = c.amplitude(u)
        b_low = -c.l_b * (u**c.theta + 1.0)
        s_high = c.L_sigma * (u**c.r + u)
    # excess > 0 marks a violation
    checks = [
        ("b_finite", np.where(np.isfinite(b) & np.isfinite(s), 0.0, np.inf)),
        ("b_upper", b - c.L_b - GROWTH_RTOL * (1.0 + abs(c.L_b))),
        ("b_lower", b_low - b - GROWTH_RTOL * (1.0 + np.abs(b_low))),
        ("sigma_nonnegative", -s),
        ("sigma_upper", s - s_high - GROWTH_RTOL * (1.0 + s_high)),
    ]
    for name, excess in checks:
        bad = np.flatnonzero(excess > 0.0)
        if bad.size:
            report = ValidationReport(
                passed=False,
                n_samples=n_samples,
                u_max=u_max,
                violated=name,
                witness=float(u[bad[0]]),
                margin=float(np.max(excess[bad])),
            )
            logger.debug("growth check failed for %s: %s", c.label, report)
            return report
    return ValidationReport(passed=True, n_samples=n_samples, u_max=u_max)


def regularize_sigma(c: CoefficientSet, n: int, u):
    """Return sigma_n(u) = sigma(u) * sqrt(u / (u + 1/n))."""
    if n < 1:
        raise DomainError(f"regularization index must be >= 1, got {n}")
    u = _nonnegative(u, "regularize_sigma")
    out = c.amplitude(u) * np.sqrt(u / (u + 1.0 / n))
    return float(out) if out.ndim == 0 else out


class _RegularizedSigma:
    """Picklable sigma_n for a given base set."""

    def __init__(self, base: CoefficientSet, n: int):
        self.base = base
        self.n = n

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return regularize_sigma(self.base, self.n, np.maximum(u, 0.0))


def regularized(c: CoefficientSet, n: int) -> CoefficientSet:
    """Return the set with sigma replaced by sigma_n and the growth exponent raised by 1/2."""
    if n < 1:
        raise DomainError(f"regularization index must be >= 1, got {n}")
    return c.model_copy(
        update={
            "sigma": _RegularizedSigma(c, n),
            "r": min(c.r + 0.5, 1.0),
            "L_sigma": c.L_sigma * np.sqrt(n) * (1.0 if c.r <= 0.5 else 2.0),
            "label": f"{c.label}_reg{n}",
        }
    )
