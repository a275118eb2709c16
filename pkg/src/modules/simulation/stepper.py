"""Explicit Euler-Maruyama finite-difference stepper for the direct equation."""

from __future__ import annotations

import logging
from typing import Protocol

import numpy as np

from ..coefficients.models import CoefficientSet
from ..core.errors import ConfigurationError, InvalidFieldError, NumericError
from ..core.fields import ScalarField, integrate
from ..core.grid import STABILITY_RTOL, TimeGrid
from .noise import noise_row
from .trajectory import NoiseLedger, RunStatus, SchemeTag, TrajectoryField

logger = logging.getLogger(__name__)

OVERFLOW_GUARD = 1e12


class CoefficientFields(Protocol):
    """Supplies the drift factor and noise amplitude used on raw step m."""

    def at_step(self, m: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


class DirectFields:
    def __init__(self, coefficients: CoefficientSet):
        self.coefficients = coefficients

    def at_step(self, m: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.coefficients.drift_factor(u), self.coefficients.amplitude(u)


def check_step_stability(dt: float, dx: float) -> None:
    if dt > 0.5 * dx * dx * (1.0 + STABILITY_RTOL):
        raise ConfigurationError(f"explicit scheme unstable: dt={dt:.6g} exceeds dx^2/2={0.5 * dx * dx:.6g}")


def em_update(
    u: np.ndarray, dx: float, dt: float, drift: np.ndarray, amplitude: np.ndarray, xi: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One explicit step on raw arrays.

    Returns the clamped new state together with the reaction density, the
    noise increment and the clamp increment, each zero on the boundary.
    """
    laplacian = np.zeros_like(u)
    laplacian[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    reaction = drift * u
    noise = amplitude * xi * np.sqrt(dt / dx)
    reaction[0] = reaction[-1] = 0.0
    noise[0] = noise[-1] = 0.0
    proposal = u + dt * (0.5 * laplacian + reaction) + noise
    proposal[0] = proposal[-1] = 0.0
    new = np.maximum(proposal, 0.0)
    return new, reaction, noise, new - proposal


def em_step(u: ScalarField, c: CoefficientSet, dt: float, noise_row: np.ndarray, *, step: int = 1) -> ScalarField:
    """Advance ``u`` by one explicit step driven by the standard normals ``noise_row``.

    ``step`` is the 1-based index of this step, reported if the update is not finite.
    """
    check_step_stability(dt, u.grid.dx)
    values = np.asarray(u.values, dtype=float)
    new, *_ = em_update(values, u.grid.dx, dt, c.drift_factor(values), c.amplitude(values), np.asarray(noise_row))
    if np.any(np.isnan(new)):
        raise NumericError("explicit step produced NaN", step=step)
    return u.with_values(new, nonnegative=True)


def dump_schedule(time: TimeGrid, dump_every: int) -> np.ndarray:
    if dump_every < 1 or time.n_steps % dump_every:
        raise ConfigurationError(f"dump_every={dump_every} must divide the {time.n_steps} time steps")
    return np.arange(0, time.n_steps + 1, dump_every)


def integrate_scheme(
    u0: ScalarField,
    fields: CoefficientFields,
    time: TimeGrid,
    seed: int,
    *,
    stream: int = 0,
    scheme: SchemeTag,
    label: str,
    dump_every: int = 1,
    record_ledger: bool = False,
) -> TrajectoryField:
    """Run the explicit scheme with coefficient fields supplied step by step."""
    grid = u0.grid
    time.check_stability(grid)
    if np.any(u0.values < 0.0):
        raise InvalidFieldError("initial profile must be nonnegative")
    if u0.values[0] != 0.0 or u0.values[-1] != 0.0:
        raise InvalidFieldError("initial profile must vanish at the boundary")

    dump_steps = dump_schedule(time, dump_every)
    values = np.empty((len(dump_steps), grid.n_points))
    values[0] = u0.values
    clamp_values = np.zeros_like(values)
    ledger = NoiseLedger.allocate(time.n_steps, grid.n_points, time.dt, grid.dx) if record_ledger else None

    u = np.array(u0.values, dtype=float)
    clamp_total = np.zeros_like(u)
    status, stop_step, stored = RunStatus.COMPLETED, None, 1
    for m in range(time.n_steps):
        drift, amplitude = fields.at_step(m, u)
        xi = noise_row(seed, stream, m, grid.n_points)
        new, reaction, noise, clamp = em_update(u, grid.dx, time.dt, drift, amplitude, xi)
        if np.any(np.isnan(new)):
            raise NumericError("explicit scheme produced NaN", step=m + 1)
        if ledger is not None:
            ledger.states[m] = u
            ledger.reaction[m] = reaction
            ledger.noise[m] = noise
            ledger.clamp[m] = clamp
        clamp_total += clamp
        u = new
        if u.max() > OVERFLOW_GUARD:
            status, stop_step = RunStatus.STOPPED, m + 1
            logger.warning("%s run (seed=%d, stream=%d) passed the overflow guard at step %d", scheme, seed, stream, m + 1)
            if ledger is not None:
                ledger = ledger.truncate(m + 1)
            break
        if (m + 1) % dump_every == 0:
            values[stored] = u
            clamp_values[stored] = clamp_total
            stored += 1

    clamped = float(integrate(clamp_total, grid))
    logger.debug("%s run (seed=%d, stream=%d): clamped mass %.3e", scheme, seed, stream, clamped)
    return TrajectoryField(
        grid=grid,
        time=time,
        dump_steps=dump_steps[:stored],
        values=values[:stored],
        scheme=scheme,
        coefficients=label,
        seed=seed,
        stream=stream,
        status=status,
        stop_step=stop_step,
        clamped_mass=clamped,
        clamp_values=clamp_values[:stored],
        ledger=ledger,
    )


def simulate_direct(
    u0: ScalarField,
    c: CoefficientSet,
    time: TimeGrid,
    seed: int,
    *,
    stream: int = 0,
    dump_every: int = 1,
    record_ledger: bool = False,
) -> TrajectoryField:
    """Simulate the direct scheme from ``u0`` over ``time``."""
    return integrate_scheme(
        u0,
        DirectFields(c),
        time,
        seed,
        stream=stream,
        scheme=SchemeTag(),
        label=c.label,
        dump_every=dump_every,
        record_ledger=record_ledger,
    )
