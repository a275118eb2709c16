"""Slab-freezing scheme: coefficients frozen at the slab starts k/n."""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..coefficients.growth import gamma_of
from ..coefficients.models import CoefficientSet
from ..core.errors import ConfigurationError, DomainError, MissingArtifactError
from ..core.fields import ScalarField, rap_norm
from ..core.grid import TimeGrid
from .stepper import integrate_scheme
from .trajectory import SchemeKind, SchemeTag, TrajectoryField

logger = logging.getLogger(__name__)

_GRID_TOL = 1e-9


class SlabSchedule(BaseModel):
    """Slabs [k delta, (k+1) delta) with delta = 1/n."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Slab index n")

    @property
    def delta(self) -> float:
        return 1.0 / self.n

    def boundaries(self, horizon: float) -> np.ndarray:
        return np.arange(0, math.floor(horizon * self.n + _GRID_TOL) + 1) * self.delta

    def slab_index(self, t: float) -> int:
        return math.floor(t * self.n + _GRID_TOL)

    def slab_start(self, t: float) -> float:
        return self.slab_index(t) * self.delta

    def steps_per_slab(self, time: TimeGrid) -> int:
        ratio = self.delta / time.dt
        k = round(ratio)
        if k < 1 or abs(ratio - k) > _GRID_TOL * ratio:
            raise ConfigurationError(f"dt={time.dt:.6g} does not divide the slab length 1/{self.n}")
        return k


def align_time_grid(horizon: float, dt_max: float, n: int, max_refinement: int = 1_000_000) -> TimeGrid:
    """Largest dt <= dt_max dividing both 1/n and the horizon."""
    if horizon <= 0.0 or dt_max <= 0.0:
        raise ConfigurationError("horizon and dt_max must be positive")
    delta = 1.0 / n
    k = max(1, math.ceil(delta / dt_max - _GRID_TOL))
    while k <= max_refinement:
        steps = horizon * n * k
        if abs(steps - round(steps)) <= _GRID_TOL * max(steps, 1.0) and round(steps) >= 1:
            return TimeGrid(horizon=horizon, n_steps=int(round(steps)))
        k += 1
    raise ConfigurationError(f"no step dividing 1/{n} also divides the horizon {horizon}")


class FrozenSlabFields:
    """Drift b(u^n) u and amplitude sqrt(gamma(u^n) u), refrozen every slab."""

    def __init__(self, coefficients: CoefficientSet, steps_per_slab: int):
        self.coefficients = coefficients
        self.steps_per_slab = steps_per_slab
        self.profiles: list[np.ndarray] = []
        self.steps: list[int] = []
        self._drift: Optional[np.ndarray] = None
        self._gamma: Optional[np.ndarray] = None

    def at_step(self, m: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if m % self.steps_per_slab == 0:
            self._drift = np.array(self.coefficients.drift_factor(u))
            self._gamma = np.asarray(gamma_of(self.coefficients, np.maximum(u, 0.0)))
            if not np.all(np.isfinite(self._gamma)):
                raise ConfigurationError(
                    f"gamma(u) is not finite at the start of slab {len(self.profiles)}; use a regularized sigma"
                )
            self.profiles.append(u.copy())
            self.steps.append(m)
            logger.debug("froze coefficients at step %d (slab %d)", m, len(self.profiles) - 1)
        return self._drift, np.sqrt(self._gamma * np.maximum(u, 0.0))


def simulate_slab(
    u0: ScalarField,
    c: CoefficientSet,
    n: int,
    time: TimeGrid,
    seed: int,
    *,
    stream: int = 0,
    dump_every: int = 1,
    record_ledger: bool = False,
) -> TrajectoryField:
    """Simulate the slab-frozen scheme; shares noise rows with the direct scheme."""
    schedule = SlabSchedule(n=n)
    fields = FrozenSlabFields(c, schedule.steps_per_slab(time))
    traj = integrate_scheme(
        u0,
        fields,
        time,
        seed,
        stream=stream,
        scheme=SchemeTag(kind=SchemeKind.SLAB, n=n),
        label=c.label,
        dump_every=dump_every,
        record_ledger=record_ledger,
    )
    traj.slab_profiles = np.stack(fields.profiles)
    traj.slab_steps = np.asarray(fields.steps)
    return traj


def frozen_field(traj: TrajectoryField, t: float, sched: SlabSchedule) -> ScalarField:
    """Return u^n(t) = u(floor(t n)/n)."""
    if t < 0.0 or t > traj.time.horizon * (1.0 + _GRID_TOL):
        raise DomainError(f"t={t} lies outside [0, {traj.time.horizon}]")
    step = int(round(sched.slab_start(t) / traj.time.dt))
    if traj.slab_profiles is not None and traj.slab_steps is not None:
        hits = np.flatnonzero(traj.slab_steps == step)
        if hits.size:
            return ScalarField(grid=traj.grid, values=traj.slab_profiles[hits[0]], nonnegative=True)
    hits = np.flatnonzero(traj.dump_steps == step)
    if hits.size:
        return traj.field_at_index(int(hits[0]))
    raise MissingArtifactError(f"u({sched.slab_start(t):.6g}) was not stored by this trajectory")


class StoppingTracker(BaseModel):
    """First dump time at which the weighted sup norm exceeds a level."""

    level: float = Field(..., gt=0.0, description="Level l")
    weight: float = Field(..., gt=0.0, description="Weight exponent lambda'")
    hit_time: Optional[float] = Field(None, description="T(l), or None if never exceeded")
    hit_index: Optional[int] = Field(None, description="Dump index of T(l)")
    running_max: float = Field(0.0, description="Largest weighted norm seen")

    def stopped_by(self, t: float) -> bool:
        return self.hit_time is not None and self.hit_time <= t


def weighted_norms(traj: TrajectoryField, weight: float) -> np.ndarray:
    return np.array([rap_norm(row, weight, grid=traj.grid) for row in traj.values])


def track_stopping(traj: TrajectoryField, level: float, weight: float) -> StoppingTracker:
    norms = weighted_norms(traj, weight)
    above = np.flatnonzero(norms > level)
    tracker = StoppingTracker(level=level, weight=weight, running_max=float(norms.max(initial=0.0)))
    if above.size:
        k = int(above[0])
        tracker.hit_index = k
        tracker.hit_time = float(traj.times[k])
    return tracker
