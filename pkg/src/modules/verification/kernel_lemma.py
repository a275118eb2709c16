"""The heat-kernel difference functional and its boundedness sweep."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad
from scipy.special import log_ndtr

from ..core.errors import DomainError
from ..core.heat import heat_kernel
from .statistics import TestVerdict

logger = logging.getLogger(__name__)

QUAD_LIMIT = 200
FINE_QUANTILE = 0.1
FINE_RATIO_LIMIT = 2.0


def _weighted_gaussian_mass(mean: float, var: float, lam: float) -> float:
    """E exp(-lambda |Y|) for Y ~ N(mean, var)."""
    if lam == 0.0:
        return 1.0
    if var <= 0.0:
        return math.exp(-lam * abs(mean))
    root = math.sqrt(var)
    base = 0.5 * lam**2 * var
    return math.exp(base - lam * mean + log_ndtr((mean - lam * var) / root)) + math.exp(
        base + lam * mean + log_ndtr((-mean - lam * var) / root)
    )


def _cross_term(a: float, b: float, x: float, x2: float, lam: float) -> float:
    """int p_a(y - x) p_b(y - x2) e^{-lambda|y|} dy."""
    total = a + b
    mean = (b * x + a * x2) / total
    return heat_kernel(total, x - x2) * _weighted_gaussian_mass(mean, a * b / total, lam)


def _inner(a: float, b: float, x: float, x2: float, lam: float) -> float:
    """int (p_a(y - x) - p_b(y - x2))^2 e^{-lambda|y|} dy in closed form."""
    return _cross_term(a, a, x, x, lam) + _cross_term(b, b, x2, x2, lam) - 2.0 * _cross_term(a, b, x, x2, lam)


def kernel_diff_functional(t: float, t2: float, x: float, x2: float, lam: float) -> float:
    """int_0^t int (p_{t-s}(y-x) - p_{t2-s}(y-x2))^2 e^{-lambda|y|} dy ds for 0 < t <= t2.

    The s-integral is taken in w = sqrt(t - s), which removes the
    (t - s)^{-1/2} endpoint singularity.
    """
    if t <= 0.0:
        raise DomainError(f"kernel functional needs t > 0, got {t}")
    if t2 < t:
        raise DomainError(f"kernel functional needs t <= t', got t={t}, t'={t2}")
    if lam < 0.0:
        raise DomainError(f"kernel functional needs lambda >= 0, got {lam}")
    if t == t2 and x == x2:
        return 0.0
    gap = t2 - t

    def integrand(w: float) -> float:
        a = max(w * w, 1e-300)
        return 2.0 * w * _inner(a, a + gap, x, x2, lam)

    value, _ = quad(integrand, 0.0, math.sqrt(t), limit=QUAD_LIMIT, epsabs=1e-13, epsrel=1e-11)
    return max(value, 0.0)


class KernelSweepGrid(BaseModel):
    """Tuples (t, t + dt, x, x + dx) with t, x from base lists and dt, dx from offset lists."""

    base_times: list[float] = Field(..., min_length=1, description="Base times as fractions of T")
    time_offsets: list[float] = Field(..., min_length=1, description="Time offsets as fractions of T")
    base_points: list[float] = Field(..., min_length=1, description="Base positions x")
    space_offsets: list[float] = Field(..., min_length=1, description="Offsets x' - x, |x' - x| <= 1")

    @classmethod
    def default(cls, size: int = 10) -> "KernelSweepGrid":
        return cls(
            base_times=np.linspace(0.1, 1.0, size).tolist(),
            time_offsets=[0.0, *np.geomspace(1e-4, 0.5, size - 1).tolist()],
            base_points=np.linspace(-1.0, 1.0, size).tolist(),
            space_offsets=[0.0, *np.geomspace(1e-3, 1.0, size - 1).tolist()],
        )

    def tuples(self, T: float) -> Iterable[tuple[float, float, float, float]]:
        for frac in self.base_times:
            for offset in self.time_offsets:
                t, t2 = frac * T, (frac + offset) * T
                if t <= 0.0 or t2 > T * (1.0 + 1e-12):
                    continue
                for x in self.base_points:
                    for dx in self.space_offsets:
                        if abs(dx) > 1.0 or (offset == 0.0 and dx == 0.0):
                            continue
                        yield t, min(t2, T), x, x + dx


def _row(args: tuple[float, float, float, float, float]) -> dict[str, float]:
    t, t2, x, x2, lam = args
    value = kernel_diff_functional(t, t2, x, x2, lam)
    scale = (abs(x2 - x) + math.sqrt(t2 - t)) * math.exp(-lam * abs(x))
    return {"t": t, "t2": t2, "x": x, "x2": x2, "lam": lam, "scale": scale, "functional": value, "ratio": value / scale}


class KernelSweepResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    T: float
    lam: float
    c_hat: float = Field(..., description="Largest ratio over the coarse pairs")
    fine_max: float = Field(..., description="Largest ratio over the finest pairs")
    verdict: TestVerdict
    rows: pd.DataFrame


def kernel_lemma_sweep(T: float, lam: float, grid: Optional[KernelSweepGrid] = None, *, jobs: int = 1) -> KernelSweepResult:
    """Ratio functional / ((|x-x'| + |t'-t|^{1/2}) e^{-lambda|x|}) over the sweep.

    Pairs in the lowest decile of the scale are the finest; the verdict passes
    iff their largest ratio is at most twice the largest coarse ratio.
    """
    if T <= 0.0 or lam <= 0.0:
        raise DomainError(f"kernel sweep needs T > 0 and lambda > 0, got T={T}, lambda={lam}")
    grid = grid or KernelSweepGrid.default()
    work = [(*item, lam) for item in grid.tuples(T)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_row, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        rows = [_row(item) for item in work]
    frame = pd.DataFrame(rows, columns=["t", "t2", "x", "x2", "lam", "scale", "functional", "ratio"])
    cutoff = frame["scale"].quantile(FINE_QUANTILE)
    fine = frame["scale"] <= cutoff
    coarse = frame.loc[~fine, "ratio"]
    c_hat = float(coarse.max()) if coarse.size else float(frame["ratio"].max())
    fine_max = float(frame.loc[fine, "ratio"].max())
    verdict = TestVerdict(
        test_id=f"kernel_lemma/T={T:g}/lambda={lam:g}",
        statistic=fine_max,
        threshold=FINE_RATIO_LIMIT * c_hat,
        passed=bool(np.isfinite(c_hat) and fine_max <= FINE_RATIO_LIMIT * c_hat),
        time=T,
        details={"c_hat": c_hat, "pairs": len(frame)},
    )
    logger.info("kernel sweep T=%g lambda=%g: C_hat=%.4g fine max=%.4g over %d pairs", T, lam, c_hat, fine_max, len(frame))
    return KernelSweepResult(T=T, lam=lam, c_hat=c_hat, fine_max=fine_max, verdict=verdict, rows=frame)
