"""Parameter sweeps over n, N, dx, dt or the replica count."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
from scipy.stats import wasserstein_distance

from ..core import ConfigurationError, heat_convolve
from ..simulation import Ensemble, SchemeKind
from ..verification import MomentReport, TestVerdict, nu_estimate
from ..verification.martingale import constant_drift
from ..verification.moments import nu_boundedness_verdict, nu_sweep_summary
from .config import RunConfig
from .runner import EnsembleRun, run_ensemble, write_run

logger = logging.getLogger(__name__)

BOOTSTRAP_RESAMPLES = 64
# Halving dx (with dt / dx^2 held fixed) must cut the deterministic error at least this much.
ERROR_RATIO_MIN = 2.0
SWEEP_FILE = "sweep.csv"
SWEEP_COLUMNS = ["variable", "value", "replicas", "mean", "se", "w1_prev", "w1_se", "heat_error", "error_ratio"]


@dataclass
class SweepResult:
    variable: str
    frame: pd.DataFrame
    verdicts: list[TestVerdict] = field(default_factory=list)
    moments: Optional[pd.DataFrame] = None
    moment_summary: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


def value_config(config: RunConfig, variable: str, value: float) -> RunConfig:
    """The run config for one sweep value; dx sweeps keep dt / dx^2 fixed."""
    if variable == "n":
        return config.with_updates("scheme", kind=SchemeKind.SLAB, n=int(value))
    if variable == "N":
        return config.with_updates("scheme", kind=SchemeKind.PARTICLE, particles=int(value))
    if variable == "replicas":
        return config.with_updates("ensemble", replicas=int(value))
    if variable == "dt":
        return config.with_updates("time", dt=float(value))
    n_cells = int(round(2.0 * config.grid.half_width / value))
    if n_cells % 2:
        n_cells += 1
    ratio = (2.0 * config.grid.half_width / n_cells) / config.grid_spec().dx
    if ratio < 1.0:
        return config.with_updates("time", dt=config.time.dt * ratio**2).with_updates("grid", n_cells=n_cells)
    return config.with_updates("grid", n_cells=n_cells).with_updates("time", dt=config.time.dt * ratio**2)


def w1_with_error(current: np.ndarray, previous: np.ndarray, seed: int) -> tuple[float, float]:
    """W1 between two empirical marginals and its bootstrap standard error."""
    distance = float(wasserstein_distance(current, previous))
    rng = np.random.default_rng(seed)
    resampled = [
        wasserstein_distance(rng.choice(current, current.size), rng.choice(previous, previous.size))
        for _ in range(BOOTSTRAP_RESAMPLES)
    ]
    return distance, float(np.std(resampled, ddof=1))


def _marginal(run: EnsembleRun, t: float, x: float) -> np.ndarray:
    """u(t, x) per replica for field runs, total mass M_t for particle runs."""
    if run.config.scheme.kind is SchemeKind.PARTICLE:
        out = []
        for snapshots in run.particle_runs():
            times = np.array([ps.time for ps in snapshots])
            out.append(snapshots[int(np.argmin(np.abs(times - t)))].total_mass)
        return np.array(out)
    ensemble = Ensemble(run.trajectories())
    return ensemble.values[:, ensemble.dump_index(t), ensemble.grid.nearest_index(x)]


def _heat_error(run: EnsembleRun, t: float) -> float:
    """max |mean u_t - e^{beta t} P_t u_0| for noiseless constant-drift runs, else NaN."""
    config = run.config
    if config.scheme.kind is SchemeKind.PARTICLE:
        return math.nan
    c = config.coefficient_set()
    beta = constant_drift(c)
    if beta is None or not np.allclose(c.amplitude(np.linspace(0.0, 100.0, 257)), 0.0):
        return math.nan
    ensemble = Ensemble(run.trajectories())
    reference = heat_convolve(ensemble.trajectories[0].u0, t).values * math.exp(beta * t)
    return float(np.max(np.abs(ensemble.mean_field(t).values - reference)))


def w1_trend_verdict(frame: pd.DataFrame) -> TestVerdict:
    """W1 between consecutive values decreases, allowing one inversion within 1 SE."""
    w1 = frame["w1_prev"].to_numpy()[1:]
    se = frame["w1_se"].to_numpy()[1:]
    rises = np.diff(w1)
    inverted = rises > 0.0
    passed = bool(inverted.sum() <= 1 and np.all(rises[inverted] <= se[1:][inverted]))
    return TestVerdict(
        test_id="sweep/w1_trend",
        statistic=float(inverted.sum()),
        threshold=1.0,
        passed=passed,
        details={"w1": w1.tolist()},
    )


def error_ratio_verdict(frame: pd.DataFrame) -> TestVerdict:
    ratios = frame["error_ratio"].dropna().to_numpy()
    worst = float(ratios.min()) if ratios.size else math.nan
    return TestVerdict(
        test_id="sweep/heat_error_ratio",
        statistic=worst,
        threshold=ERROR_RATIO_MIN,
        passed=bool(ratios.size and worst >= ERROR_RATIO_MIN),
        details={"ratios": ratios.tolist()},
    )


def run_sweep(
    config: RunConfig,
    directory: Path,
    *,
    jobs: int = 1,
    on_value: Optional[Callable[[float], None]] = None,
) -> SweepResult:
    """Run one ensemble per sweep value, write each under ``directory`` and tabulate."""
    sweep = config.sweep
    if not sweep.values:
        raise ConfigurationError("sweep.values is empty")
    directory = Path(directory)
    t = sweep.marginal_time if sweep.marginal_time is not None else config.time.horizon
    rows = []
    reports: dict[int, list[MomentReport]] = {}
    previous: Optional[np.ndarray] = None
    previous_error = math.nan
    for value in sweep.values:
        current_config = value_config(config, sweep.variable, value)
        run = run_ensemble(current_config, jobs=jobs)
        write_run(run, directory / f"{sweep.variable}_{value:g}")
        marginal = _marginal(run, t, sweep.marginal_x)
        w1, w1_se = (math.nan, math.nan) if previous is None else w1_with_error(marginal, previous, config.ensemble.seed)
        error = _heat_error(run, t)
        rows.append(
            {
                "variable": sweep.variable,
                "value": value,
                "replicas": marginal.size,
                "mean": float(marginal.mean()),
                "se": float(marginal.std(ddof=1) / math.sqrt(marginal.size)) if marginal.size > 1 else 0.0,
                "w1_prev": w1,
                "w1_se": w1_se,
                "heat_error": error,
                "error_ratio": previous_error / error if error > 0.0 else math.nan,
            }
        )
        if sweep.variable == "n" and len(run.trajectories()) >= 2:
            ensemble = Ensemble(run.trajectories())
            reports[int(value)] = [nu_estimate(ensemble, config.moments.lam, q, t) for q in config.moments.q]
        previous, previous_error = marginal, error
        logger.info("sweep %s=%g: mean %.6g, W1 to previous %.4g", sweep.variable, value, rows[-1]["mean"], w1)
        if on_value is not None:
            on_value(value)
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    result = SweepResult(variable=sweep.variable, frame=frame)
    if sweep.variable == "n" and len(frame) >= 3:
        result.verdicts.append(w1_trend_verdict(frame))
    if sweep.variable == "dx" and frame["heat_error"].notna().all() and len(frame) >= 2:
        result.verdicts.append(error_ratio_verdict(frame))
    if reports:
        result.moments = pd.DataFrame(
            [
                {"n": n, "q": r.q, "lam": r.lam, "estimate": r.estimate, "se": r.standard_error}
                for n, per_q in sorted(reports.items())
                for r in per_q
            ]
        )
        summaries = {q: nu_sweep_summary({n: per_q[i] for n, per_q in reports.items()}) for i, q in enumerate(config.moments.q)}
        result.moment_summary = {f"q={q:g}/{key}": float(v) for q, s in summaries.items() for key, v in s.items()}
        if len(reports) >= 2:
            result.verdicts.append(nu_boundedness_verdict(summaries))
    return result
