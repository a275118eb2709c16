"""The martingale Z_t(phi), its quadratic variations and the ensemble tests built on it."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..coefficients.growth import gamma_of
from ..coefficients.models import CoefficientSet
from ..core.errors import InsufficientDataError, SuiteMismatchError
from ..core.fields import ScalarField, integrate
from ..semigroup.feynman_kac import semigroup_bound_field
from ..simulation.particles import ParticleSystem
from ..simulation.slab import SlabSchedule, frozen_field
from ..simulation.trajectory import Ensemble, SchemeKind, TrajectoryField
from .observables import TestFunction, check_support
from .statistics import DEFAULT_FLOOR, Z_THRESHOLD, RunningMoments, TestVerdict, combine, z_verdict

logger = logging.getLogger(__name__)

MIN_REPLICAS = 200
QV_BAND = (0.85, 1.15)
DEFAULT_QV_STRIDE = 10


@dataclass(frozen=True, eq=False)
class MartingaleSeries:
    """Z_t(phi) at the dump times of one replica, with predicted and realized QV."""

    observable: str
    times: np.ndarray
    pairing: np.ndarray
    z: np.ndarray
    predicted_qv: np.ndarray
    realized_qv: np.ndarray

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, t):
            raise InsufficientDataError(f"t={t} is not a stored time of the series")
        return k

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"time": self.times, "pairing": self.pairing, "z": self.z, "predicted_qv": self.predicted_qv, "realized_qv": self.realized_qv}
        )


def _realized(z: np.ndarray, stride: int) -> np.ndarray:
    """Sum of squared increments over the partition {0, s, 2s, ..., k} up to each k."""
    out = np.zeros_like(z)
    closed = 0.0
    for k in range(1, z.size):
        anchor = (k - 1) // stride * stride
        if k % stride == 0:
            closed += (z[k] - z[anchor]) ** 2
            out[k] = closed
        else:
            out[k] = closed + (z[k] - z[anchor]) ** 2
    return out


def _assemble(observable_id, times, pairing, compensator_rate, qv_rate, correction, stride) -> MartingaleSeries:
    dt = np.diff(times)
    compensator = np.concatenate([[0.0], np.cumsum(compensator_rate[:-1] * dt)])
    z = pairing - pairing[0] - compensator - correction
    predicted = np.concatenate([[0.0], np.cumsum(qv_rate[:-1] * dt)])
    return MartingaleSeries(observable_id, times, pairing, z, predicted, _realized(z, stride))


def z_process(
    traj: TrajectoryField,
    phi: TestFunction,
    c: CoefficientSet,
    *,
    drift_offset: float = 0.0,
    qv_stride: int = DEFAULT_QV_STRIDE,
    compensate_clamp: bool = True,
) -> MartingaleSeries:
    """Z_t(phi) = <phi,u_t> - <phi,u_0> - sum <phi''/2 + b phi, u_s> dt over the dump times.

    Slab runs use b(u^n) in the compensator and gamma(u^n)u as the QV density;
    direct runs use b(u) and sigma(u)^2. ``drift_offset`` shifts b for the
    miscalibration control. With ``compensate_clamp`` the mass restored by
    clamping at zero is removed from Z as part of the finite-variation term.
    """
    check_support(phi, traj.grid)
    values, grid = traj.values, traj.grid
    if traj.scheme.kind is SchemeKind.SLAB:
        schedule = SlabSchedule(n=traj.scheme.n)
        frozen = np.stack([frozen_field(traj, t, schedule).values for t in traj.times])
        drift = c.drift_factor(frozen) + drift_offset
        qv_density = np.asarray(gamma_of(c, frozen)) * values
    else:
        drift = c.drift_factor(values) + drift_offset
        qv_density = c.amplitude(values) ** 2
    pairing = integrate(values * phi.phi, grid)
    compensator_rate = integrate((phi.half_laplacian + drift * phi.phi) * values, grid)
    qv_rate = integrate(qv_density * phi.phi**2, grid)
    correction = integrate(traj.clamp_history() * phi.phi, grid) if compensate_clamp else np.zeros_like(pairing)
    stride = _stride(traj.dump_steps, qv_stride)
    return _assemble(phi.id, traj.times, pairing, compensator_rate, qv_rate, correction, stride)


def _stride(dump_steps: np.ndarray, qv_stride: int) -> int:
    spacing = int(dump_steps[1] - dump_steps[0]) if dump_steps.size > 1 else 1
    return max(1, round(qv_stride / spacing))


def z_process_particles(
    snapshots: Sequence[ParticleSystem],
    phi: TestFunction,
    b_field: ScalarField,
    gamma_field: ScalarField,
    *,
    qv_stride: int = 1,
) -> MartingaleSeries:
    """Z_t(phi) for the empirical measure of a particle run with frozen fields."""
    x = phi.grid.x

    def pair(ps: ParticleSystem, f: np.ndarray) -> float:
        return ps.integrate(f, x)

    times = np.array([ps.time for ps in snapshots])
    pairing = np.array([pair(ps, phi.phi) for ps in snapshots])
    compensator_rate = np.array([pair(ps, phi.half_laplacian + b_field.values * phi.phi) for ps in snapshots])
    qv_rate = np.array([pair(ps, gamma_field.values * phi.phi**2) for ps in snapshots])
    return _assemble(phi.id, times, pairing, compensator_rate, qv_rate, np.zeros_like(pairing), max(1, qv_stride))


def _require(series: Sequence[MartingaleSeries], minimum: int, what: str) -> None:
    if len(series) < minimum:
        raise InsufficientDataError(f"{what} needs at least {minimum} replicas, got {len(series)}")


def martingale_test(
    series: Sequence[MartingaleSeries],
    t: float,
    *,
    min_replicas: int = MIN_REPLICAS,
    floor: float = DEFAULT_FLOOR,
) -> TestVerdict:
    """Mean of Z_t and the orthogonality E[(Z_t - Z_s) <phi, u_s>] with s near t/2."""
    _require(series, min_replicas, "martingale test")
    k = series[0].index_of(t)
    s = int(np.argmin(np.abs(series[0].times - 0.5 * t)))
    observable = series[0].observable
    mean = z_verdict(f"martingale/{observable}/mean", np.array([item.z[k] for item in series]), floor=floor, time=t)
    increments = np.array([(item.z[k] - item.z[s]) * item.pairing[s] for item in series])
    orthogonal = z_verdict(f"martingale/{observable}/orthogonality", increments, floor=floor, time=t, s=float(series[0].times[s]))
    verdict = combine(f"martingale/{observable}", [mean, orthogonal])
    verdict.time = t
    verdict.details.update(mean=mean.statistic, mean_se=mean.standard_error, orthogonality=orthogonal.statistic)
    logger.debug("martingale test %s at t=%g: %s", observable, t, verdict.label)
    return verdict


def qv_compare(
    series: Sequence[MartingaleSeries],
    t: float,
    *,
    min_replicas: int = MIN_REPLICAS,
    band: tuple[float, float] = QV_BAND,
    floor: float = DEFAULT_FLOOR,
) -> TestVerdict:
    """Realized against predicted quadratic variation, plus E[Z_t^2 - <Z>_t] = 0."""
    _require(series, min_replicas, "QV comparison")
    k = series[0].index_of(t)
    observable = series[0].observable
    realized = np.array([item.realized_qv[k] for item in series])
    predicted = np.array([item.predicted_qv[k] for item in series])
    p_mean, r_mean = predicted.mean(), realized.mean()
    if p_mean <= 0.0:
        passed = r_mean <= floor
        return TestVerdict(
            test_id=f"qv/{observable}",
            statistic=1.0 if passed else math.inf,
            threshold=floor,
            passed=passed,
            time=t,
            details={"realized": float(r_mean), "predicted": float(p_mean)},
        )
    ratio = r_mean / p_mean
    ratio_se = RunningMoments().push(realized - ratio * predicted).std_error / p_mean
    gap_se = RunningMoments().push(realized - predicted).std_error
    lo, hi = band
    in_band = lo <= ratio <= hi
    gap_ok = abs(r_mean - p_mean) <= Z_THRESHOLD * gap_se + floor
    square = np.array([item.z[k] ** 2 for item in series]) - predicted
    compensated = z_verdict(f"qv/{observable}/compensated_square", square, floor=floor + (hi - 1.0) * p_mean, time=t)
    verdict = TestVerdict(
        test_id=f"qv/{observable}",
        statistic=float(ratio),
        standard_error=float(ratio_se),
        threshold=float(hi),
        passed=bool(in_band and gap_ok and compensated.passed),
        time=t,
        details={
            "realized": float(r_mean),
            "predicted": float(p_mean),
            "band": [lo, hi],
            "gap_se": float(gap_se),
            "gap_passed": bool(gap_ok),
            "compensated_square": compensated.statistic,
            "compensated_square_passed": compensated.passed,
        },
    )
    logger.debug("QV comparison %s at t=%g: ratio %.4f (%s)", observable, t, ratio, verdict.label)
    return verdict


def _clamp_pairing(ensemble: Ensemble, k: int, weights: np.ndarray) -> np.ndarray:
    return integrate(ensemble.clamp_values[:, k] * weights, ensemble.grid)


def domination_check(
    ensemble: Ensemble,
    phi: TestFunction,
    t: float,
    L_b: float,
    *,
    floor: float = DEFAULT_FLOOR,
) -> TestVerdict:
    """mean |<phi, u_t>| <= integral of P_t^{L_b}|phi| u0 + 3 SE."""
    k = ensemble.dump_index(t)
    u0 = ScalarField(grid=ensemble.grid, values=ensemble.values[0, 0], nonnegative=True)
    bound = semigroup_bound_field(u0, ScalarField(grid=ensemble.grid, values=phi.abs_phi, nonnegative=True), t, L_b)
    moments = RunningMoments().push(np.abs(integrate(ensemble.values[:, k] * phi.phi, ensemble.grid)))
    allowance = math.exp(L_b * t) * float(_clamp_pairing(ensemble, k, phi.abs_phi).mean())
    threshold = bound + Z_THRESHOLD * moments.std_error + allowance + floor * max(1.0, bound)
    return TestVerdict(
        test_id=f"domination/{phi.id}",
        statistic=moments.mean,
        standard_error=moments.std_error,
        threshold=threshold,
        passed=bool(moments.mean <= threshold),
        time=t,
        details={"bound": bound, "ratio": moments.mean / bound if bound > 0.0 else 0.0, "clamp_allowance": allowance},
    )


def constant_drift(c: CoefficientSet, u_max: float = 100.0) -> Optional[float]:
    """Return beta if b is constant on [0, u_max], else None."""
    samples = c.drift_factor(np.linspace(0.0, u_max, 257))
    beta = float(samples[0])
    return beta if np.allclose(samples, beta, rtol=0.0, atol=1e-12) else None


def mass_law_verdict(
    test_id: str, masses: np.ndarray, m0: float, beta: float, t: float, *, allowance: float = 0.0, floor: float = DEFAULT_FLOOR
) -> TestVerdict:
    """Pass iff mean M_t / (e^{beta t} M_0) lies within 1 +- 3 SE."""
    target = math.exp(beta * t) * m0
    if target <= 0.0:
        return z_verdict(test_id, masses, 0.0, floor=floor, time=t)
    verdict = z_verdict(test_id, np.asarray(masses) / target, 1.0, floor=floor + allowance / target, time=t)
    verdict.details.update(target=target, beta=beta)
    return verdict


def mass_law_check(
    ensemble: Ensemble, beta: float, t: float, coefficients: Optional[CoefficientSet] = None, *, floor: float = DEFAULT_FLOOR
) -> TestVerdict:
    """Exponential mass law E M_t = e^{beta t} M_0 for constant drift b = beta."""
    if coefficients is not None:
        actual = constant_drift(coefficients)
        if actual is None or not math.isclose(actual, beta, rel_tol=1e-12, abs_tol=1e-12):
            raise SuiteMismatchError(f"mass law declared with beta={beta} but the run used {coefficients.label} (b={actual})")
    k = ensemble.dump_index(t)
    masses = ensemble.masses()
    allowance = math.exp(max(beta, 0.0) * t) * float(_clamp_pairing(ensemble, k, np.ones(ensemble.grid.n_points)).mean())
    return mass_law_verdict("mass_law", masses[:, k], float(masses[0, 0]), beta, t, allowance=allowance, floor=floor)


def particle_variance_verdict(masses: np.ndarray, m0: float, t: float, gamma: float = 1.0, *, floor: float = DEFAULT_FLOOR) -> TestVerdict:
    """Critical branching: Var M_t = gamma M_0 t."""
    masses = np.asarray(masses, dtype=float)
    if masses.size < 2:
        raise InsufficientDataError("variance check needs at least 2 replicas")
    centred = masses - masses.mean()
    variance = float(np.mean(centred**2)) * masses.size / (masses.size - 1)
    se = math.sqrt(max(float(np.mean(centred**4)) - float(np.mean(centred**2)) ** 2, 0.0) / masses.size)
    target = gamma * m0 * t
    threshold = Z_THRESHOLD * se + floor
    return TestVerdict(
        test_id="particle_variance",
        statistic=variance,
        standard_error=se,
        threshold=threshold,
        passed=bool(abs(variance - target) <= threshold),
        time=t,
        details={"target": target},
    )
