"""Martingale-problem tests and the moment, Gronwall, kernel and Hoelder diagnostics."""

from .observables import TestFunction, build_observable, bump, constant, default_catalog, tilted_bump
from .statistics import RunningMoments, TestVerdict, combine, z_verdict
from .martingale import (
    MartingaleSeries,
    domination_check,
    mass_law_check,
    mass_law_verdict,
    martingale_test,
    particle_variance_verdict,
    qv_compare,
    z_process,
    z_process_particles,
)
from .moments import FirstMomentBound, MomentReport, nu_estimate, nu_first_moment_bound
from .gronwall import GronwallResult, gronwall_fixed_point
from .kernel_lemma import KernelSweepGrid, KernelSweepResult, kernel_diff_functional, kernel_lemma_sweep
from .holder import HolderEstimate, HolderMode, holder_exponent

__all__ = [
    "TestFunction",
    "build_observable",
    "bump",
    "constant",
    "default_catalog",
    "tilted_bump",
    "RunningMoments",
    "TestVerdict",
    "combine",
    "z_verdict",
    "MartingaleSeries",
    "domination_check",
    "mass_law_check",
    "mass_law_verdict",
    "martingale_test",
    "particle_variance_verdict",
    "qv_compare",
    "z_process",
    "z_process_particles",
    "FirstMomentBound",
    "MomentReport",
    "nu_estimate",
    "nu_first_moment_bound",
    "GronwallResult",
    "gronwall_fixed_point",
    "KernelSweepGrid",
    "KernelSweepResult",
    "kernel_diff_functional",
    "kernel_lemma_sweep",
    "HolderEstimate",
    "HolderMode",
    "holder_exponent",
]
