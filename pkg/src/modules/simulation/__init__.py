"""Noise, the direct and slab-frozen steppers and the branching-particle backend."""

from .noise import NoiseRealization, noise_row, sample_noise
from .trajectory import Ensemble, NoiseLedger, RunStatus, SchemeKind, SchemeTag, TrajectoryField
from .stepper import OVERFLOW_GUARD, em_step, simulate_direct
from .slab import SlabSchedule, StoppingTracker, align_time_grid, frozen_field, simulate_slab, track_stopping
from .particles import (
    ComparisonReport,
    DyadicDensity,
    ParticleSystem,
    cross_validate_slab,
    density_estimate,
    simulate_particles,
)

__all__ = [
    "NoiseRealization",
    "noise_row",
    "sample_noise",
    "Ensemble",
    "NoiseLedger",
    "RunStatus",
    "SchemeKind",
    "SchemeTag",
    "TrajectoryField",
    "OVERFLOW_GUARD",
    "em_step",
    "simulate_direct",
    "SlabSchedule",
    "StoppingTracker",
    "align_time_grid",
    "frozen_field",
    "simulate_slab",
    "track_stopping",
    "ComparisonReport",
    "DyadicDensity",
    "ParticleSystem",
    "cross_validate_slab",
    "density_estimate",
    "simulate_particles",
]
