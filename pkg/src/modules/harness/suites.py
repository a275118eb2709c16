"""Verification suites run against a stored ensemble, plus the standalone lemma suites."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
import pandas as pd

from ..coefficients import CoefficientSet
from ..core import InsufficientDataError, SuiteMismatchError
from ..semigroup import mild_residual
from ..simulation import Ensemble, ParticleSystem, SchemeKind, cross_validate_slab
from ..verification import (
    KernelSweepGrid,
    MartingaleSeries,
    TestFunction,
    TestVerdict,
    domination_check,
    gronwall_fixed_point,
    holder_exponent,
    kernel_lemma_sweep,
    martingale_test,
    mass_law_check,
    mass_law_verdict,
    nu_estimate,
    nu_first_moment_bound,
    particle_variance_verdict,
    qv_compare,
    z_process,
    z_process_particles,
    z_verdict,
)
from ..verification.martingale import constant_drift
from ..verification.statistics import DEFAULT_FLOOR, Z_THRESHOLD
from .config import CONFIG_SUITES, LEMMA_SUITES, MomentsConfig, RunConfig, SuiteName
from .runner import EnsembleRun, frozen_fields, run_replica

logger = logging.getLogger(__name__)

GRONWALL_HORIZON = 1.0

FIELD_ONLY = {SuiteName.DOMINATION, SuiteName.MILD, SuiteName.MOMENTS, SuiteName.HOLDER}
PARTICLE_ONLY = {SuiteName.PARTICLE_VARIANCE, SuiteName.CROSS_CHECK}


@dataclass
class SuiteOutcome:
    """Verdicts plus named tables for the report and the CSV outputs."""

    verdicts: list[TestVerdict] = field(default_factory=list)
    frames: dict[str, pd.DataFrame] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def extend(self, other: "SuiteOutcome") -> "SuiteOutcome":
        self.verdicts.extend(other.verdicts)
        self.frames.update(other.frames)
        return self


def check_compatible(suites: Iterable[SuiteName], kind: SchemeKind) -> None:
    """Raise for suites that cannot run on this scheme instead of skipping them."""
    suites = set(suites)
    if kind is SchemeKind.PARTICLE:
        bad = sorted(s.value for s in suites & FIELD_ONLY)
        if bad:
            raise SuiteMismatchError(f"suite(s) {', '.join(bad)} need field trajectories, the run is particle-based")
    else:
        bad = sorted(s.value for s in suites & PARTICLE_ONLY)
        if bad:
            raise SuiteMismatchError(f"suite(s) {', '.join(bad)} need a particle run, the run is {kind.value}")


def _series_frame(series_by_observable: dict[str, list[MartingaleSeries]]) -> pd.DataFrame:
    """Ensemble means of Z and both quadratic variations per observable and dump time."""
    rows = []
    for observable, series in series_by_observable.items():
        z = np.stack([s.z for s in series])
        predicted = np.stack([s.predicted_qv for s in series])
        realized = np.stack([s.realized_qv for s in series])
        se = z.std(axis=0, ddof=1) / math.sqrt(len(series)) if len(series) > 1 else np.zeros(z.shape[1])
        for k, t in enumerate(series[0].times):
            rows.append(
                {
                    "observable": observable,
                    "time": float(t),
                    "mean_z": float(z[:, k].mean()),
                    "se_z": float(se[k]),
                    "predicted_qv": float(predicted[:, k].mean()),
                    "realized_qv": float(realized[:, k].mean()),
                }
            )
    return pd.DataFrame(rows, columns=["observable", "time", "mean_z", "se_z", "predicted_qv", "realized_qv"])


def _martingale_suites(
    config: RunConfig,
    suites: set[SuiteName],
    observables: list[TestFunction],
    build: Callable[[TestFunction], list[MartingaleSeries]],
) -> SuiteOutcome:
    outcome = SuiteOutcome()
    series_by_observable = {observable.id: build(observable) for observable in observables}
    for t in config.verify_times():
        for series in series_by_observable.values():
            if SuiteName.MARTINGALE in suites:
                outcome.verdicts.append(martingale_test(series, t, min_replicas=config.verify.min_replicas))
            if SuiteName.QV in suites:
                outcome.verdicts.append(qv_compare(series, t, min_replicas=config.verify.min_replicas))
    outcome.frames["martingale_series"] = _series_frame(series_by_observable)
    return outcome


def _mass_beta(c: CoefficientSet) -> float:
    beta = constant_drift(c)
    if beta is None:
        raise SuiteMismatchError(f"mass_law needs a constant drift b = beta; {c.label} has a state-dependent b")
    return beta


def _mild_suite(config: RunConfig, ensemble: Ensemble) -> SuiteOutcome:
    """Replay replicas with a noise ledger and test that the mild residual has mean zero."""
    outcome = SuiteOutcome()
    replicas = min(config.verify.mild_replicas or config.ensemble.replicas, config.ensemble.replicas)
    x = 0.0
    times = config.verify_times()
    residuals: dict[float, list[float]] = {t: [] for t in times}
    rows = []
    replayed = 0
    # one ledger in memory at a time
    for i in range(replicas):
        traj = run_replica(config, i, record_ledger=True)
        if not traj.completed:
            continue
        replayed += 1
        for t in times:
            result = mild_residual(traj, None, t, x)
            residuals[t].append(result.residual)
            rows.append({"replica": i, **result.model_dump()})
    if not replayed:
        raise InsufficientDataError("mild suite: every replayed replica stopped")
    for t in times:
        outcome.verdicts.append(
            z_verdict("mild/residual", np.array(residuals[t]), floor=DEFAULT_FLOOR, time=t, x=x, requested=replicas)
        )
    outcome.frames["mild_residuals"] = pd.DataFrame(rows)
    logger.info("mild suite replayed %d of %d replica(s)", replayed, replicas)
    return outcome


def _moments_suite(config: RunConfig, ensemble: Ensemble, c: CoefficientSet) -> SuiteOutcome:
    """nu(lambda, q, t) traces; q = 1 is checked against the first-moment bound."""
    outcome = SuiteOutcome()
    lam = config.moments.lam
    u0 = ensemble.trajectories[0].u0
    rows = []
    for t in config.verify_times():
        for q in config.moments.q:
            report = nu_estimate(ensemble, lam, q, t)
            rows.extend({"lam": lam, "q": q, "time": s, "running_sup": v} for s, v in zip(report.times, report.trace))
            test_id = f"moments/nu/q={q:g}"
            if q == 1.0:
                bound = nu_first_moment_bound(u0, lam, t, c.L_b).bound
                threshold = bound + Z_THRESHOLD * report.standard_error + DEFAULT_FLOOR * max(1.0, bound)
                outcome.verdicts.append(
                    TestVerdict(
                        test_id=test_id,
                        statistic=report.estimate,
                        standard_error=report.standard_error,
                        threshold=threshold,
                        passed=bool(report.estimate <= threshold),
                        time=t,
                        details={"bound": bound},
                    )
                )
            else:
                outcome.verdicts.append(
                    TestVerdict(
                        test_id=test_id,
                        statistic=report.estimate,
                        standard_error=report.standard_error,
                        threshold=math.inf,
                        passed=bool(np.isfinite(report.estimate)),
                        time=t,
                    )
                )
    outcome.frames["moments"] = pd.DataFrame(rows, columns=["lam", "q", "time", "running_sup"])
    return outcome


def _holder_suite(config: RunConfig, ensemble: Ensemble, c: CoefficientSet) -> SuiteOutcome:
    outcome = SuiteOutcome()
    rows = []
    for mode in ("time", "space"):
        estimate = holder_exponent(
            ensemble,
            config.moments.holder_q,
            mode,
            c.L_b,
            center=config.initial.center,
            half_width=config.moments.holder_half_width,
        )
        outcome.verdicts.append(estimate.verdict)
        rows.extend(
            {"mode": mode, "lag": lag, "moment": m, "exponent": estimate.exponent}
            for lag, m in zip(estimate.lags, estimate.moments)
        )
    outcome.frames["holder"] = pd.DataFrame(rows, columns=["mode", "lag", "moment", "exponent"])
    return outcome


def run_field_suites(config: RunConfig, run: EnsembleRun, suites: list[SuiteName]) -> SuiteOutcome:
    selected = set(suites) - set(LEMMA_SUITES) - set(CONFIG_SUITES)
    check_compatible(selected, config.scheme.kind)
    ensemble = Ensemble(run.trajectories())
    c = config.coefficient_set()
    observables = config.observables(ensemble.grid)
    outcome = SuiteOutcome()
    if selected & {SuiteName.MARTINGALE, SuiteName.QV}:
        v = config.verify

        def build(observable: TestFunction) -> list[MartingaleSeries]:
            return [
                z_process(
                    traj, observable, c, drift_offset=v.drift_offset, qv_stride=v.qv_stride, compensate_clamp=v.compensate_clamp
                )
                for traj in ensemble.trajectories
            ]

        outcome.extend(_martingale_suites(config, selected, observables, build))
    for t in config.verify_times():
        if SuiteName.DOMINATION in selected:
            outcome.verdicts.extend(domination_check(ensemble, observable, t, c.L_b) for observable in observables)
        if SuiteName.MASS_LAW in selected:
            outcome.verdicts.append(mass_law_check(ensemble, _mass_beta(c), t, c))
    if SuiteName.MILD in selected:
        outcome.extend(_mild_suite(config, ensemble))
    if SuiteName.MOMENTS in selected:
        outcome.extend(_moments_suite(config, ensemble, c))
    if SuiteName.HOLDER in selected:
        outcome.extend(_holder_suite(config, ensemble, c))
    for verdict in outcome.verdicts:
        verdict.details["dropped_replicas"] = ensemble.dropped
    return outcome


def _snapshot_index(snapshots: list[ParticleSystem], t: float) -> int:
    times = np.array([ps.time for ps in snapshots])
    k = int(np.argmin(np.abs(times - t)))
    if not math.isclose(times[k], t, rel_tol=1e-9, abs_tol=1e-12):
        raise InsufficientDataError(f"no particle snapshot at t={t}")
    return k


def run_particle_suites(config: RunConfig, run: EnsembleRun, suites: list[SuiteName]) -> SuiteOutcome:
    selected = set(suites) - set(LEMMA_SUITES) - set(CONFIG_SUITES)
    check_compatible(selected, SchemeKind.PARTICLE)
    runs = run.particle_runs()
    if not runs:
        raise InsufficientDataError("no completed particle runs")
    c = config.coefficient_set()
    b_field, gamma_field = frozen_fields(config)
    observables = config.observables()
    outcome = SuiteOutcome()
    if selected & {SuiteName.MARTINGALE, SuiteName.QV}:
        shifted = b_field.with_values(b_field.values + config.verify.drift_offset)

        def build(observable: TestFunction) -> list[MartingaleSeries]:
            return [z_process_particles(snapshots, observable, shifted, gamma_field) for snapshots in runs]

        outcome.extend(_martingale_suites(config, selected, observables, build))
    m0 = float(np.mean([snapshots[0].total_mass for snapshots in runs]))
    for t in config.verify_times():
        k = _snapshot_index(runs[0], t)
        masses = np.array([snapshots[k].total_mass for snapshots in runs])
        if SuiteName.MASS_LAW in selected:
            outcome.verdicts.append(mass_law_verdict("mass_law", masses, m0, _mass_beta(c), t))
        if SuiteName.PARTICLE_VARIANCE in selected:
            gamma = gamma_field.values[gamma_field.values > 0.0]
            beta = constant_drift(c)
            if not gamma.size or not np.allclose(gamma, gamma[0], rtol=1e-9) or beta != 0.0:
                raise SuiteMismatchError("particle_variance needs b = 0 and a constant branching rate gamma")
            outcome.verdicts.append(particle_variance_verdict(masses, m0, t, float(gamma[0])))
    return outcome


def run_cross_check(config: RunConfig) -> SuiteOutcome:
    """Slab stepper against the particle system at the horizon, both started from u0."""
    n = config.scheme.n or 1
    time, _ = config.time.build(n)
    report = cross_validate_slab(
        config.initial_field(),
        config.coefficient_set(),
        n,
        config.scheme.particles,
        config.time.horizon,
        time=time,
        replicas=config.ensemble.replicas,
        seed=config.ensemble.seed,
        observables={observable.id: observable.phi for observable in config.observables()},
    )
    outcome = SuiteOutcome()
    for row in report.rows:
        outcome.verdicts.append(
            TestVerdict(
                test_id=f"cross_check/{row.observable}",
                statistic=float(max(abs(row.z_mean), abs(row.z_var))),
                threshold=Z_THRESHOLD,
                passed=row.passed,
                time=report.t_check,
                details={**row.model_dump(exclude={"observable", "passed"}), "flagged_cells": len(report.flagged_cells)},
            )
        )
    outcome.frames["cross_check"] = pd.DataFrame([row.model_dump() for row in report.rows])
    return outcome


def run_lemma_suites(config: Optional[RunConfig], suites: list[SuiteName], *, jobs: int = 1) -> SuiteOutcome:
    """Gronwall and heat-kernel checks: pure quadrature, no ensemble needed."""
    moments = config.moments if config is not None else MomentsConfig()
    outcome = SuiteOutcome()
    if SuiteName.GRONWALL in suites:
        frames = []
        times = np.linspace(0.0, GRONWALL_HORIZON, moments.gronwall_points)
        for label, f in (("one", np.ones_like(times)), ("t", times.copy())):
            for c in moments.gronwall_c:
                result = gronwall_fixed_point(f, c, GRONWALL_HORIZON)
                verdict = result.verdict.model_copy(update={"test_id": f"gronwall/f={label}/c={c:g}"})
                frames.append(
                    pd.DataFrame({"f_kind": label, "c": c, "time": result.times, "f": result.f, "g_star": result.g_star, "bound": result.bound})
                )
        outcome.frames["gronwall"] = pd.concat(frames, ignore_index=True)
    if SuiteName.KERNEL_LEMMA in suites:
        frames = []
        grid = KernelSweepGrid.default(moments.kernel_size)
        for T in moments.kernel_T:
            for lam in moments.kernel_lam:
                result = kernel_lemma_sweep(T, lam, grid, jobs=jobs)
                outcome.verdicts.append(result.verdict)
                frames.append(result.rows.assign(T=T))
        outcome.frames["kernel_lemma"] = pd.concat(frames, ignore_index=True)
    return outcome


def run_suites(config: RunConfig, run: Optional[EnsembleRun], suites: list[SuiteName], *, jobs: int = 1) -> SuiteOutcome:
    """Run every selected suite; ensemble suites need ``run``."""
    outcome = SuiteOutcome()
    ensemble_suites = [s for s in suites if s not in LEMMA_SUITES and s not in CONFIG_SUITES]
    if ensemble_suites:
        if run is None:
            raise SuiteMismatchError(f"suite(s) {', '.join(s.value for s in ensemble_suites)} need a manifest")
        if config.scheme.kind is SchemeKind.PARTICLE:
            outcome.extend(run_particle_suites(config, run, ensemble_suites))
        else:
            outcome.extend(run_field_suites(config, run, ensemble_suites))
    if SuiteName.CROSS_CHECK in suites:
        check_compatible([SuiteName.CROSS_CHECK], config.scheme.kind)
        outcome.extend(run_cross_check(config))
    outcome.extend(run_lemma_suites(config, [s for s in suites if s in LEMMA_SUITES], jobs=jobs))
    failed = [v.test_id for v in outcome.verdicts if not v.passed]
    logger.info("%d verdict(s), %d failed", len(outcome.verdicts), len(failed))
    return outcome
