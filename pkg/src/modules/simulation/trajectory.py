"""Trajectory containers shared by the direct, slab and particle schemes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.errors import DomainError, InsufficientDataError, MissingArtifactError
from ..core.fields import ScalarField, integrate
from ..core.grid import GridSpec, TimeGrid

logger = logging.getLogger(__name__)


class SchemeKind(str, Enum):
    DIRECT = "direct"
    SLAB = "slab"
    PARTICLE = "particle"


class SchemeTag(BaseModel):
    """Which scheme produced a trajectory: direct, slab(n) or particle(N)."""

    model_config = ConfigDict(frozen=True)

    kind: SchemeKind = Field(SchemeKind.DIRECT, description="Scheme family")
    n: Optional[int] = Field(None, ge=1, description="Slab index n (delta_n = 1/n)")
    particles: Optional[int] = Field(None, ge=1, description="Particle scaling N")

    def __str__(self) -> str:
        if self.kind is SchemeKind.SLAB:
            return f"slab({self.n})"
        if self.kind is SchemeKind.PARTICLE:
            return f"particle({self.particles})"
        return "direct"


class RunStatus(str, Enum):
    COMPLETED = "completed"
    STOPPED = "stopped"


@dataclass(eq=False)
class NoiseLedger:
    """Per-step increments of one run, indexed by raw step m = 0..M-1.

    ``states[m]`` is u(t_m); ``reaction[m]`` is the drift density used on
    step m (b(u)u, or b(u^n)u under slab freezing); ``noise[m]`` is the added
    noise increment and ``clamp[m]`` the mass restored by clamping at 0.
    """

    dt: float
    dx: float
    states: np.ndarray
    reaction: np.ndarray
    noise: np.ndarray
    clamp: np.ndarray

    @classmethod
    def allocate(cls, n_steps: int, n_points: int, dt: float, dx: float) -> "NoiseLedger":
        shape = (n_steps, n_points)
        return cls(dt=dt, dx=dx, states=np.zeros(shape), reaction=np.zeros(shape), noise=np.zeros(shape), clamp=np.zeros(shape))

    @property
    def n_steps(self) -> int:
        return self.noise.shape[0]

    def truncate(self, n_steps: int) -> "NoiseLedger":
        return NoiseLedger(
            dt=self.dt,
            dx=self.dx,
            states=self.states[:n_steps],
            reaction=self.reaction[:n_steps],
            noise=self.noise[:n_steps],
            clamp=self.clamp[:n_steps],
        )


@dataclass(eq=False)
class TrajectoryField:
    """u(t, x_j) stored at the dump steps of a run, with its provenance."""

    grid: GridSpec
    time: TimeGrid
    dump_steps: np.ndarray
    values: np.ndarray
    scheme: SchemeTag
    coefficients: str
    seed: int
    stream: int = 0
    status: RunStatus = RunStatus.COMPLETED
    stop_step: Optional[int] = None
    clamped_mass: float = 0.0
    clamp_values: Optional[np.ndarray] = None
    ledger: Optional[NoiseLedger] = None
    slab_profiles: Optional[np.ndarray] = None
    slab_steps: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.dump_steps * self.time.dt

    @property
    def n_dumps(self) -> int:
        return len(self.dump_steps)

    @property
    def u0(self) -> ScalarField:
        return self.field_at_index(0)

    @property
    def completed(self) -> bool:
        return self.status is RunStatus.COMPLETED

    def dump_index(self, t: float) -> int:
        """Index k with times[k] == t."""
        m = self.time.step_of(t)
        hits = np.flatnonzero(self.dump_steps == m)
        if not hits.size:
            raise DomainError(f"t={t} is not a dump time of this trajectory")
        return int(hits[0])

    def field_at_index(self, k: int) -> ScalarField:
        return ScalarField(grid=self.grid, values=self.values[k], nonnegative=True, label=f"u(t={self.times[k]:.6g})")

    def at_time(self, t: float) -> ScalarField:
        return self.field_at_index(self.dump_index(t))

    def masses(self) -> np.ndarray:
        return integrate(self.values, self.grid)

    def clamp_history(self) -> np.ndarray:
        """Cumulative clamped density at each dump, zero when not recorded."""
        return np.zeros_like(self.values) if self.clamp_values is None else self.clamp_values

    def require_ledger(self) -> NoiseLedger:
        if self.ledger is None:
            raise MissingArtifactError("trajectory was simulated without a noise ledger")
        return self.ledger


class Ensemble:
    """Replica trajectories of one configuration, stacked as (R, n_dumps, J+1)."""

    def __init__(self, trajectories: Sequence[TrajectoryField]):
        completed = [traj for traj in trajectories if traj.completed]
        dropped = len(trajectories) - len(completed)
        if dropped:
            logger.warning("ensemble drops %d stopped replica(s) out of %d", dropped, len(trajectories))
        if not completed:
            raise InsufficientDataError("ensemble has no completed replicas")
        head = completed[0]
        for traj in completed[1:]:
            if traj.grid != head.grid or traj.time != head.time or not np.array_equal(traj.dump_steps, head.dump_steps):
                raise DomainError("ensemble replicas must share grids and dump steps")
        self.trajectories = list(completed)
        self.dropped = dropped
        self.grid = head.grid
        self.time = head.time
        self.dump_steps = head.dump_steps
        self.values = np.stack([traj.values for traj in completed])
        self.clamp_values = np.stack([traj.clamp_history() for traj in completed])

    def __len__(self) -> int:
        return len(self.trajectories)

    @property
    def times(self) -> np.ndarray:
        return self.dump_steps * self.time.dt

    @property
    def scheme(self) -> SchemeTag:
        return self.trajectories[0].scheme

    def dump_index(self, t: float) -> int:
        return self.trajectories[0].dump_index(t)

    def marginal(self, t: float, x: float) -> np.ndarray:
        """u(t, x) across replicas."""
        return self.values[:, self.dump_index(t), self.grid.index_of(x)]

    def mean_field(self, t: float) -> ScalarField:
        return ScalarField(grid=self.grid, values=self.values[:, self.dump_index(t)].mean(axis=0), nonnegative=True)

    def masses(self) -> np.ndarray:
        """Total mass, shape (R, n_dumps)."""
        return integrate(self.values, self.grid)

    def require(self, minimum: int, what: str) -> None:
        if len(self) < minimum:
            raise InsufficientDataError(f"{what} needs at least {minimum} replicas, got {len(self)}")
