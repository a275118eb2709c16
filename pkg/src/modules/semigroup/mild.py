"""Mild-form residual of a simulated trajectory.

The stored per-step increments are convolved with the heat kernel up to a
window h = 4 dt before t, where the kernel is not resolved by the grid; the
remaining window is bridged by P_h u(t - h) and reported separately.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from ..core.errors import DomainError, NumericError
from ..core.fields import ScalarField
from ..core.heat import heat_convolve
from ..simulation.trajectory import NoiseLedger, TrajectoryField

WINDOW_STEPS = 4


class MildResidual(BaseModel):
    """Both sides of the mild form at one space-time point."""

    t: float = Field(..., description="Time of evaluation")
    x: float = Field(..., description="Grid point of evaluation")
    potential: float = Field(0.0, description="Constant Feynman-Kac potential g")
    lhs: float = Field(..., description="u(t, x)")
    rhs_deterministic: float = Field(..., description="P_t^g u0(x) plus the drift and clamp convolution")
    rhs_stochastic: float = Field(..., description="Convolution of the stored noise increments")
    window_correction: float = Field(..., description="u(t, x) - e^{g h} P_h u(t - h)(x)")
    residual: float = Field(..., description="lhs minus all right-hand terms")

    @property
    def rhs_total(self) -> float:
        return self.rhs_deterministic + self.rhs_stochastic + self.window_correction


def _kernel_rows(tau: np.ndarray, offsets: np.ndarray, dx: float) -> np.ndarray:
    tau = tau[:, None]
    return np.exp(-(offsets[None, :] ** 2) / (2.0 * tau)) / np.sqrt(2.0 * np.pi * tau) * dx


def mild_residual(
    traj: TrajectoryField,
    z_incr: NoiseLedger | None,
    t: float,
    x: float,
    *,
    potential: float = 0.0,
) -> MildResidual:
    """Evaluate the mild form u(t,x) = P_t^g u0 + drift + clamp + stochastic convolutions.

    With ``potential`` g the drift density b(u)u enters as (b(u) - g)u and
    every kernel carries the factor e^{g (t - s)}.
    """
    ledger = z_incr if z_incr is not None else traj.require_ledger()
    grid, dt = traj.grid, traj.time.dt
    steps = traj.time.step_of(t)
    j = grid.index_of(x)
    if steps < WINDOW_STEPS:
        raise DomainError(f"t={t} is closer than {WINDOW_STEPS} steps to 0")
    if steps > ledger.n_steps:
        raise DomainError(f"t={t} lies beyond the recorded ledger")

    g = potential
    head = steps - WINDOW_STEPS
    h = WINDOW_STEPS * dt
    u_t = ledger.states[steps] if steps < ledger.n_steps else traj.at_time(t).values
    bridged = heat_convolve(ScalarField(grid=grid, values=ledger.states[head]), h).values[j] * np.exp(g * h)
    free = heat_convolve(traj.u0, t).values[j] * np.exp(g * t)

    deterministic = free
    stochastic = 0.0
    if head:
        offsets = grid.x - x
        tau = t - (np.arange(head) + 0.5) * dt
        weights = _kernel_rows(tau, offsets, grid.dx) * np.exp(g * tau)[:, None]
        drift = dt * (ledger.reaction[:head] - g * ledger.states[:head]) + ledger.clamp[:head]
        deterministic += float(np.sum(weights * drift))
        stochastic = float(np.sum(weights * ledger.noise[:head]))

    lhs = float(u_t[j])
    window = lhs - bridged
    residual = lhs - (deterministic + stochastic + window)
    if not np.isfinite(residual):
        raise NumericError("mild residual is not finite", step=steps)
    return MildResidual(
        t=t,
        x=x,
        potential=g,
        lhs=lhs,
        rhs_deterministic=deterministic,
        rhs_stochastic=stochastic,
        window_correction=window,
        residual=residual,
    )
