"""Branching Brownian particles for the (B, b, gamma) super-Brownian motion.

Each particle carries mass 1/N, moves as a Brownian motion and, where
gamma > 0, branches at rate N gamma into 0 or 2 offspring. The offspring law
is tilted so the expected growth over a sub-step h is exactly e^{b h}. Where
gamma = 0 the drift acts through a pure birth/death clock instead.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.integrate import cumulative_trapezoid

from ..coefficients.growth import gamma_of
from ..coefficients.models import CoefficientSet
from ..core.errors import ConfigurationError, DomainError, InsufficientDataError
from ..core.fields import ScalarField
from ..core.grid import TimeGrid
from .noise import NoiseRealization
from .slab import SlabSchedule, simulate_slab
from .stepper import dump_schedule

logger = logging.getLogger(__name__)

# Upper bound on the per-sub-step branching and birth/death probabilities.
MAX_EVENT_PROBABILITY = 0.1
MIN_PARTICLE_SCALE = 100


@dataclass(frozen=True, eq=False)
class ParticleSystem:
    """Snapshot of the particle cloud at one time."""

    positions: np.ndarray
    scale: int
    time: float

    @property
    def mass(self) -> float:
        return 1.0 / self.scale

    @property
    def count(self) -> int:
        return int(self.positions.size)

    @property
    def total_mass(self) -> float:
        return self.count / self.scale

    def integrate(self, phi: np.ndarray, x: np.ndarray) -> float:
        """<phi, X_t> with phi given on the grid points ``x``."""
        if not self.count:
            return 0.0
        return float(np.interp(self.positions, x, phi).sum() / self.scale)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"time": np.full(self.count, self.time), "position": self.positions, "mass": np.full(self.count, self.mass)}
        )


class DyadicDensity(BaseModel):
    """Cell masses times 2^level on the cells [j 2^-level, (j+1) 2^-level)."""

    level: int = Field(..., ge=0, description="Dyadic resolution level")
    cells: list[int] = Field(default_factory=list, description="Occupied cell indices j")
    density: list[float] = Field(default_factory=list, description="2^level times the cell mass")

    @property
    def cell_width(self) -> float:
        return 2.0**-self.level

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.density)) * self.cell_width

    def value_at(self, x: np.ndarray | float) -> np.ndarray:
        lookup = dict(zip(self.cells, self.density))
        j = np.floor(np.asarray(x, dtype=float) * 2.0**self.level).astype(int)
        return np.vectorize(lambda k: lookup.get(int(k), 0.0), otypes=[float])(j)


def density_estimate(ps: ParticleSystem, n_dyadic: int) -> DyadicDensity:
    if n_dyadic < 0:
        raise DomainError(f"dyadic level must be >= 0, got {n_dyadic}")
    if not ps.count:
        return DyadicDensity(level=n_dyadic)
    cells, counts = np.unique(np.floor(ps.positions * 2.0**n_dyadic).astype(np.int64), return_counts=True)
    return DyadicDensity(
        level=n_dyadic,
        cells=cells.tolist(),
        density=(counts * 2.0**n_dyadic / ps.scale).tolist(),
    )


def _substeps(dt: float, scale: int, drift: np.ndarray, gamma: np.ndarray) -> int:
    rate = max(scale * float(gamma.max(initial=0.0)), float(np.abs(drift).max(initial=0.0)))
    return max(1, math.ceil(dt * rate / MAX_EVENT_PROBABILITY - 1e-12))


def check_validity(drift: np.ndarray, gamma: np.ndarray, scale: int, h: float, x: np.ndarray) -> list[int]:
    """Raise on cells where the offspring law is not a probability; return cells with gamma = 0 and b != 0."""
    branching = gamma > 0.0
    growth = np.expm1(drift * h)
    bad = np.flatnonzero(branching & (np.abs(growth) > scale * gamma * h))
    if bad.size:
        j = int(bad[0])
        raise ConfigurationError(
            f"particle scale N={scale} too small at cell {j} (x={x[j]:.6g}): "
            f"|b|={abs(drift[j]):.6g} needs N > {abs(growth[j]) / (gamma[j] * h):.6g}"
        )
    return np.flatnonzero(~branching & (drift != 0.0)).tolist()


def _initial_positions(u0: ScalarField, scale: int, rng: np.random.Generator) -> np.ndarray:
    mass = u0.integral()
    if mass <= 0.0:
        return np.empty(0)
    cdf = cumulative_trapezoid(u0.values, u0.x, initial=0.0)
    cdf /= cdf[-1]
    count = math.ceil(scale * mass - 1e-9)
    return np.interp(rng.uniform(size=count), cdf, u0.x)


def _branch(positions, drift, gamma, scale, h, rng) -> np.ndarray:
    p_branch = scale * gamma * h
    branching = gamma > 0.0
    growth = np.expm1(drift * h)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_two = np.clip(0.5 + growth / (2.0 * p_branch), 0.0, 1.0)
    ring = rng.uniform(size=positions.size)
    coin = rng.uniform(size=positions.size)
    fires = branching & (ring < p_branch)
    doubles = fires & (coin < p_two)
    dies = fires & ~doubles
    # birth/death clock where gamma vanishes
    doubles |= ~branching & (drift > 0.0) & (ring < growth)
    dies |= ~branching & (drift < 0.0) & (ring < -growth)
    keep = positions[~dies]
    return np.concatenate([keep, positions[doubles]])


def simulate_particles(
    u0: ScalarField,
    b_field: ScalarField,
    gamma_field: ScalarField,
    N: int,
    time: TimeGrid,
    seed: int,
    *,
    stream: int = 0,
    dump_every: int = 1,
) -> list[ParticleSystem]:
    """Run the particle system with frozen fields; one snapshot per dump step."""
    if N < MIN_PARTICLE_SCALE:
        raise ConfigurationError(f"particle scale N must be >= {MIN_PARTICLE_SCALE}, got {N}")
    if np.any(gamma_field.values < 0.0):
        raise ConfigurationError("gamma field must be nonnegative")
    x = u0.x
    half_width = u0.grid.half_width
    substeps = _substeps(time.dt, N, b_field.values, gamma_field.values)
    h = time.dt / substeps
    flagged = check_validity(b_field.values, gamma_field.values, N, h, x)
    if flagged:
        logger.info("%d cell(s) have gamma = 0 and b != 0; drift there uses the birth/death clock", len(flagged))

    rng = NoiseRealization(seed, stream).particle_generator()
    positions = _initial_positions(u0, N, rng)
    dump_schedule(time, dump_every)
    snapshots = [ParticleSystem(positions=positions.copy(), scale=N, time=0.0)]
    for m in range(time.n_steps):
        for _ in range(substeps):
            if not positions.size:
                break
            positions = positions + np.sqrt(h) * rng.standard_normal(positions.size)
            positions = positions[np.abs(positions) < half_width]
            drift = np.interp(positions, x, b_field.values)
            gamma = np.interp(positions, x, gamma_field.values)
            positions = _branch(positions, drift, gamma, N, h, rng)
        if (m + 1) % dump_every == 0:
            snapshots.append(ParticleSystem(positions=positions.copy(), scale=N, time=float((m + 1) * time.dt)))
    logger.debug("particle run (seed=%d, stream=%d) ends with %d particles", seed, stream, positions.size)
    return snapshots


class ComparisonRow(BaseModel):
    observable: str
    slab_mean: float
    particle_mean: float
    z_mean: float
    slab_var: float
    particle_var: float
    z_var: float
    clamp_allowance: float = 0.0
    passed: bool


class ComparisonReport(BaseModel):
    """Slab stepper against the particle system within the first slab."""

    n: int = Field(..., description="Slab index")
    particles: int = Field(..., description="Particle scale N")
    t_check: float = Field(..., description="Comparison time")
    replicas: int = Field(..., description="Replicas per backend")
    rows: list[ComparisonRow] = Field(default_factory=list)
    flagged_cells: list[int] = Field(default_factory=list, description="Cells with gamma = 0 and b != 0")

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _z(diff: float, se: float, floor: float) -> tuple[float, bool]:
    passed = abs(diff) <= 3.0 * se + floor
    return (diff / se if se > 0.0 else (0.0 if passed else math.inf)), passed


def _variance_se(samples: np.ndarray) -> float:
    r = samples.size
    centred = samples - samples.mean()
    m4 = float(np.mean(centred**4))
    s2 = float(np.mean(centred**2))
    return math.sqrt(max(m4 - s2 * s2, 0.0) / r)


def cross_validate_slab(
    u0: ScalarField,
    c: CoefficientSet,
    n: int,
    N: int,
    t_check: float,
    *,
    time: TimeGrid,
    replicas: int,
    seed: int,
    observables: Mapping[str, np.ndarray],
    tolerance: float = 1e-3,
) -> ComparisonReport:
    """Compare mean and variance of <phi, u(t_check)> for each observable between both backends.

    ``time`` must end at ``t_check`` and divide 1/n; ``observables`` maps names to
    test-function samples on the grid.
    """
    if replicas < 2:
        raise InsufficientDataError(f"cross-check needs at least 2 replicas, got {replicas}")
    schedule = SlabSchedule(n=n)
    if t_check > schedule.delta * (1.0 + 1e-9):
        raise DomainError(f"t_check={t_check} lies beyond the first slab [0, 1/{n}]")
    if abs(time.horizon - t_check) > 1e-9 * t_check:
        raise DomainError("time grid must end at t_check")
    b_field = u0.with_values(c.drift_factor(u0.values), nonnegative=False)
    gamma_field = u0.with_values(gamma_of(c, u0.values), nonnegative=True)
    substeps = _substeps(time.dt, N, b_field.values, gamma_field.values)
    flagged = check_validity(b_field.values, gamma_field.values, N, time.dt / substeps, u0.x)

    x = u0.x
    names = list(observables)
    slab = np.empty((replicas, len(names)))
    cloud = np.empty((replicas, len(names)))
    clamp = np.empty((replicas, len(names)))
    for i in range(replicas):
        run = simulate_slab(u0, c, n, time, seed, stream=i, dump_every=time.n_steps)
        u_t, clamp_t = run.values[-1], run.clamp_history()[-1]
        final = simulate_particles(u0, b_field, gamma_field, N, time, seed, stream=i, dump_every=time.n_steps)[-1]
        for k, name in enumerate(names):
            slab[i, k] = u0.with_values(u_t).pair(observables[name])
            clamp[i, k] = u0.with_values(clamp_t).pair(np.abs(observables[name]))
            cloud[i, k] = final.integrate(observables[name], x)

    rows = []
    for k, name in enumerate(names):
        s, p = slab[:, k], cloud[:, k]
        se_mean = math.sqrt(s.var(ddof=1) / replicas + p.var(ddof=1) / replicas) if replicas > 1 else 0.0
        # mass restored by clamping biases the slab mean upward by at most this much
        allowance = float(clamp[:, k].mean())
        z_mean, ok_mean = _z(s.mean() - p.mean(), se_mean, allowance + tolerance * max(1.0, abs(s.mean())))
        se_var = math.hypot(_variance_se(s), _variance_se(p))
        z_var, ok_var = _z(s.var(ddof=1) - p.var(ddof=1), se_var, tolerance * max(1.0, s.var(ddof=1)))
        rows.append(
            ComparisonRow(
                observable=name,
                slab_mean=float(s.mean()),
                particle_mean=float(p.mean()),
                z_mean=z_mean,
                slab_var=float(s.var(ddof=1)),
                particle_var=float(p.var(ddof=1)),
                z_var=z_var,
                clamp_allowance=allowance,
                passed=ok_mean and ok_var,
            )
        )
    report = ComparisonReport(n=n, particles=N, t_check=t_check, replicas=replicas, rows=rows, flagged_cells=flagged)
    logger.info("slab/particle cross-check at t=%.4g: %s", t_check, "pass" if report.passed else "FAIL")
    return report
