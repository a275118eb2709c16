"""Maximal solution of g(t) <= c (f(t) + int_0^t (t-s)^{-1/2} g(s) ds) by Picard iteration."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from ..core.errors import ConvergenceError, DomainError
from .statistics import TestVerdict

logger = logging.getLogger(__name__)

GRONWALL_TOL = 1e-10
GRONWALL_MAX_ITER = 200


def singular_weights(times: np.ndarray) -> np.ndarray:
    """Matrix W with (W g)_i = int_0^{t_i} (t_i - s)^{-1/2} g(s) ds for piecewise-linear g.

    On [t_k, t_{k+1}] with a = t_i - t_{k+1}, b = t_i - t_k the integral of
    w^{-1/2} against the linear interpolant is g_k A + (g_{k+1} - g_k) B / h with
    A = 2(sqrt b - sqrt a) and B = 2b(sqrt b - sqrt a) - (2/3)(b^{3/2} - a^{3/2}).
    """
    times = np.asarray(times, dtype=float)
    n = times.size
    weights = np.zeros((n, n))
    for i in range(1, n):
        t_k, t_next = times[:i], times[1 : i + 1]
        a, b = times[i] - t_next, times[i] - t_k
        h = t_next - t_k
        root_a, root_b = np.sqrt(a), np.sqrt(b)
        A = 2.0 * (root_b - root_a)
        B = 2.0 * b * (root_b - root_a) - (2.0 / 3.0) * (b * root_b - a * root_a)
        weights[i, :i] += A - B / h
        weights[i, 1 : i + 1] += B / h
    return weights


def gronwall_operator(g: np.ndarray, f: np.ndarray, c: float, weights: np.ndarray) -> np.ndarray:
    """G(g) = c (f + int_0^t (t-s)^{-1/2} g(s) ds)."""
    return c * (f + weights @ g)


def constant_source_solution(c: float, t: np.ndarray | float) -> np.ndarray | float:
    """Closed form of the maximal solution for f = 1: c e^{pi c^2 t} erfc(-c sqrt(pi t))."""
    t = np.asarray(t, dtype=float)
    out = c * np.exp(math.pi * c**2 * t) * erfc(-c * np.sqrt(math.pi * t))
    return float(out) if out.ndim == 0 else out


@dataclass
class GronwallResult:
    times: np.ndarray
    f: np.ndarray
    g_star: np.ndarray
    bound: np.ndarray
    iterations: int
    converged: bool
    changes: list[float] = field(default_factory=list)
    verdict: TestVerdict | None = None

    def require_converged(self) -> "GronwallResult":
        if not self.converged:
            raise ConvergenceError(f"Picard iteration stopped after {self.iterations} steps, last change {self.changes[-1]:.3g}")
        return self


def gronwall_fixed_point(
    f: np.ndarray,
    c: float,
    T: float,
    *,
    tol: float = GRONWALL_TOL,
    max_iter: int = GRONWALL_MAX_ITER,
) -> GronwallResult:
    """Iterate G from g = 0 on the uniform grid carrying the table ``f``.

    The verdict checks g*(t) <= f(t) exp(4 c sqrt t) at every grid time.
    """
    f = np.asarray(f, dtype=float)
    if c < 0.0:
        raise DomainError(f"Gronwall constant must be nonnegative, got {c}")
    if T <= 0.0:
        raise DomainError(f"Gronwall horizon must be positive, got {T}")
    if f.ndim != 1 or f.size < 2:
        raise DomainError("f must be a table with at least two entries")
    if np.any(f < 0.0) or np.any(np.diff(f) < 0.0):
        raise DomainError("f must be nonnegative and nondecreasing")
    times = np.linspace(0.0, T, f.size)
    weights = singular_weights(times)
    g = np.zeros_like(f)
    changes: list[float] = []
    converged = False
    for _ in range(max_iter):
        updated = gronwall_operator(g, f, c, weights)
        changes.append(float(np.max(np.abs(updated - g))))
        g = updated
        if changes[-1] < tol:
            converged = True
            break
    if not converged:
        logger.warning("Gronwall iteration did not converge: c=%g T=%g last change %.3g", c, T, changes[-1])
    bound = f * np.exp(4.0 * c * np.sqrt(times))
    excess = g - bound
    slack = 1e-12 * max(1.0, float(np.max(bound)))
    verdict = TestVerdict(
        test_id=f"gronwall/c={c:g}",
        statistic=float(np.max(excess)),
        threshold=slack,
        passed=bool(converged and np.all(excess <= slack)),
        time=T,
        details={"iterations": len(changes), "g_star_T": float(g[-1]), "bound_T": float(bound[-1])},
    )
    return GronwallResult(times, f, g, bound, len(changes), converged, changes, verdict)
