"""Weighted moment estimates nu(lambda, q, t) and the first-moment bound chain."""

from __future__ import annotations

import logging
import math

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import log_ndtr

from ..core.errors import DomainError, InsufficientDataError
from ..core.fields import ScalarField, integrate, rap_norm
from ..simulation.trajectory import Ensemble
from .statistics import TestVerdict

logger = logging.getLogger(__name__)

MAX_SWEEP_SPREAD = 0.25


class MomentReport(BaseModel):
    """sup_{s<=t} of the ensemble mean of int e^{lambda|x|} u(s,x)^q dx."""

    lam: float = Field(..., gt=0.0, description="Exponential weight lambda")
    q: float = Field(..., gt=0.0, description="Moment order")
    t: float = Field(..., ge=0.0, description="Horizon of the supremum")
    estimate: float = Field(..., ge=0.0, description="Estimated nu(lambda, q, t)")
    standard_error: float = Field(0.0, ge=0.0, description="Standard error at the maximising time")
    times: list[float] = Field(default_factory=list, description="Dump times up to t")
    trace: list[float] = Field(default_factory=list, description="Running supremum at each dump time")
    replicas: int = Field(0, ge=0, description="Replicas used")


def nu_estimate(ensemble: Ensemble, lam: float, q: float, t: float, *, min_replicas: int = 2) -> MomentReport:
    if lam <= 0.0 or q <= 0.0:
        raise DomainError(f"nu needs lambda > 0 and q > 0, got lambda={lam}, q={q}")
    ensemble.require(min_replicas, "moment estimate")
    rap_norm(ensemble.values[0, 0], 2.0 * lam, ensemble.grid)
    k = ensemble.dump_index(t)
    weight = np.exp(lam * np.abs(ensemble.grid.x))
    per_replica = integrate(weight * ensemble.values[:, : k + 1] ** q, ensemble.grid)
    mean = per_replica.mean(axis=0)
    trace = np.maximum.accumulate(mean)
    best = int(np.argmax(mean))
    se = float(per_replica[:, best].std(ddof=1) / math.sqrt(len(ensemble)))
    return MomentReport(
        lam=lam,
        q=q,
        t=t,
        estimate=float(trace[-1]),
        standard_error=se,
        times=ensemble.times[: k + 1].tolist(),
        trace=trace.tolist(),
        replicas=len(ensemble),
    )


def expected_exp_abs(y: np.ndarray, lam: float, s: float) -> np.ndarray:
    """E exp(lambda |y + B_s|) for a standard Brownian motion B."""
    y = np.asarray(y, dtype=float)
    if s == 0.0:
        return np.exp(lam * np.abs(y))
    root = math.sqrt(s)
    base = 0.5 * lam**2 * s
    return np.exp(base + lam * y + log_ndtr((y + lam * s) / root)) + np.exp(base - lam * y + log_ndtr((-y + lam * s) / root))


class FirstMomentBound(BaseModel):
    """sup_{s<=t} e^{L_b s} int P_s(e^{lambda|.|}) u_0 and its constant c(t, lambda)."""

    lam: float
    t: float
    L_b: float
    bound: float = Field(..., ge=0.0)
    weighted_mass: float = Field(..., ge=0.0, description="int e^{lambda|y|} u_0(y) dy")
    constant: float = Field(..., description="bound / weighted_mass, NaN when u_0 = 0")


def nu_first_moment_bound(u0: ScalarField, lam: float, t: float, L_b: float) -> FirstMomentBound:
    """Bound on nu(lambda, 1, t) for drifts b <= L_b.

    E e^{lambda|y+B_s|} is nondecreasing in s, so for L_b >= 0 the supremum sits at s = t.
    """
    if lam <= 0.0 or t < 0.0:
        raise DomainError(f"bound needs lambda > 0 and t >= 0, got lambda={lam}, t={t}")
    x = u0.grid.x
    s_max = t if L_b >= 0.0 else 0.0
    bound = math.exp(L_b * s_max) * u0.pair(expected_exp_abs(x, lam, s_max))
    if L_b < 0.0:
        for s in np.linspace(0.0, t, 65)[1:]:
            bound = max(bound, math.exp(L_b * s) * u0.pair(expected_exp_abs(x, lam, float(s))))
    weighted = u0.pair(np.exp(lam * np.abs(x)))
    constant = bound / weighted if weighted > 0.0 else math.nan
    logger.debug("first-moment bound lambda=%g t=%g: c=%.6g", lam, t, constant)
    return FirstMomentBound(lam=lam, t=t, L_b=L_b, bound=bound, weighted_mass=weighted, constant=constant)


def nu_sweep_summary(reports: dict[int, MomentReport]) -> dict[str, float]:
    """Spread and trend of nu estimates across the slab index n."""
    if not reports:
        raise InsufficientDataError("moment sweep is empty")
    ns = sorted(reports)
    values = np.array([reports[n].estimate for n in ns])
    errors = np.array([reports[n].standard_error for n in ns])
    spread = float((values.max() - values.min()) / values.max()) if values.max() > 0.0 else 0.0
    rises = np.diff(values) - errors[1:]
    return {
        "sup_n": float(values.max()),
        "relative_spread": spread,
        "upward_trend": bool(rises.size and np.any(rises > 0.0)),
    }


def nu_boundedness_verdict(summaries: dict[float, dict[str, float]], max_spread: float = MAX_SWEEP_SPREAD) -> TestVerdict:
    """nu estimates across n stay within ``max_spread`` and never rise by more than 1 SE."""
    worst = max((s["relative_spread"] for s in summaries.values()), default=math.nan)
    rising = [q for q, s in summaries.items() if s["upward_trend"]]
    return TestVerdict(
        test_id="sweep/nu_boundedness",
        statistic=float(worst),
        threshold=max_spread,
        passed=bool(summaries and worst <= max_spread and not rising),
        details={"rising_q": rising, "spread": {str(q): s["relative_spread"] for q, s in summaries.items()}},
    )
