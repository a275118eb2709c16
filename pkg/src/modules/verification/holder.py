"""Regression estimates of the time and space Hoelder exponents of u - P_t^{L_b} u_0."""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import linregress

from ..core.errors import DomainError, InsufficientDataError
from ..semigroup.feynman_kac import feynman_kac_const
from ..simulation.trajectory import Ensemble
from .statistics import TestVerdict

logger = logging.getLogger(__name__)

TIME_BAND = (0.15, 0.35)
SPACE_BAND = (0.35, 0.65)
MIN_LAG_DECADES = 1.0
# Time lags below a few dx^2 resolve the lattice rather than the field.
TIME_LAG_CELLS = 10.0
N_LAGS = 10


class HolderMode(str, Enum):
    TIME = "time"
    SPACE = "space"


class HolderEstimate(BaseModel):
    mode: HolderMode
    q: float = Field(..., gt=1.0, description="Moment order; increments are raised to 2q")
    exponent: float = Field(..., description="Regression slope divided by 2q")
    slope: float
    slope_stderr: float
    lags: list[float]
    moments: list[float]
    band: tuple[float, float]
    verdict: TestVerdict


def centred_fields(ensemble: Ensemble, L_b: float) -> np.ndarray:
    """u - P_t^{L_b} u_0 at every dump time, shape (R, n_dumps, J+1)."""
    u0 = ensemble.trajectories[0].u0
    mean_part = np.stack([feynman_kac_const(u0, float(t), L_b).values for t in ensemble.times])
    return ensemble.values - mean_part[None]


def _log_lags(low: int, high: int, num: int = N_LAGS) -> np.ndarray:
    return np.unique(np.clip(np.round(np.geomspace(low, high, num)), low, high).astype(int))


def _window(ensemble: Ensemble, center: float, half_width: float) -> np.ndarray:
    x = ensemble.grid.x
    return np.flatnonzero(np.abs(x - center) <= half_width)


def holder_exponent(
    ensemble: Ensemble,
    q: float,
    mode: HolderMode | str,
    L_b: float = 0.0,
    *,
    center: float = 0.0,
    half_width: float = 0.5,
    band: Optional[tuple[float, float]] = None,
) -> HolderEstimate:
    """Slope of log E|du|^{2q} against log lag, divided by 2q.

    Time increments are taken backwards from the last dump time, space
    increments at the last dump time; both are averaged over replicas and
    over the grid points within ``half_width`` of ``center``.
    """
    mode = HolderMode(mode)
    if q <= 1.0:
        raise DomainError(f"Hoelder regression needs q > 1, got {q}")
    band = band or (TIME_BAND if mode is HolderMode.TIME else SPACE_BAND)
    fields = centred_fields(ensemble, L_b)
    points = _window(ensemble, center, half_width)
    dx = ensemble.grid.dx
    last = len(ensemble.times) - 1
    if mode is HolderMode.TIME:
        spacing = float(ensemble.times[1] - ensemble.times[0]) if last else 0.0
        if spacing <= 0.0:
            raise InsufficientDataError("time regression needs at least two dump times")
        low = max(1, math.ceil(TIME_LAG_CELLS * dx**2 / spacing))
        high = last // 2
        steps = _log_lags(low, high) if high >= low else np.array([], dtype=int)
        increments = [fields[:, last][:, points] - fields[:, last - k][:, points] for k in steps]
        lags = steps * spacing
    else:
        final = fields[:, last]
        high = min(int(0.5 * math.sqrt(ensemble.times[-1]) / dx), points.size - 1)
        steps = _log_lags(1, high) if high >= 1 else np.array([], dtype=int)
        increments = [final[:, points[:-k]] - final[:, points[k:]] for k in steps]
        lags = steps * dx
    if lags.size < 3 or math.log10(lags[-1] / lags[0]) < MIN_LAG_DECADES:
        raise InsufficientDataError(f"{mode.value} lags span less than one decade")
    moments = np.array([np.mean(np.abs(inc) ** (2.0 * q)) for inc in increments])
    if np.any(moments <= 0.0):
        raise InsufficientDataError("increment moments vanish; nothing to regress")
    fit = linregress(np.log(lags), np.log(moments))
    exponent = float(fit.slope / (2.0 * q))
    lo, hi = band
    verdict = TestVerdict(
        test_id=f"holder/{mode.value}/q={q:g}",
        statistic=exponent,
        standard_error=float(fit.stderr / (2.0 * q)),
        threshold=0.5 * (hi - lo),
        passed=bool(lo <= exponent <= hi),
        time=float(ensemble.times[-1]),
        details={"band": [lo, hi], "lags": int(lags.size)},
    )
    logger.debug("Hoelder %s exponent %.3f over lags [%g, %g]", mode.value, exponent, lags[0], lags[-1])
    return HolderEstimate(
        mode=mode,
        q=q,
        exponent=exponent,
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
        lags=lags.tolist(),
        moments=moments.tolist(),
        band=band,
        verdict=verdict,
    )
