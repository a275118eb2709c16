"""Tests for the Hoelder exponent regressions."""

import numpy as np
import pytest

from src.modules.coefficients import CoefficientSet, catalog
from src.modules.core import DomainError, GridSpec, InsufficientDataError, TimeGrid, gaussian_density
from src.modules.simulation import Ensemble, simulate_direct
from src.modules.verification import HolderMode, holder_exponent
from src.modules.verification.holder import centred_fields


def _const(value):
    return lambda u: np.full_like(np.asarray(u, dtype=float), value)


GRID = GridSpec(half_width=4.0, n_cells=400)
TIME = TimeGrid(horizon=0.25, n_steps=1250)


@pytest.fixture(scope="module")
def smooth_ensemble():
    growth = CoefficientSet(b=_const(0.5), sigma=_const(0.0), r=1.0, L_b=0.5, label="growth")
    traj = simulate_direct(gaussian_density(GRID, 0.25), growth, TIME, seed=0, dump_every=10)
    return Ensemble([traj, traj])


def test_centring_removes_heat_flow_of_initial_profile():
    traj = simulate_direct(
        gaussian_density(GRID, 0.25),
        CoefficientSet(b=_const(0.0), sigma=_const(0.0), r=1.0, label="heat"),
        TIME,
        seed=0,
        dump_every=125,
    )
    assert np.max(np.abs(centred_fields(Ensemble([traj]), 0.0))) <= 1e-3


@pytest.mark.parametrize("mode", ["time", "space"])
def test_smooth_control_is_flagged(smooth_ensemble, mode):
    estimate = holder_exponent(smooth_ensemble, 2.0, mode, 0.0, half_width=1.5)
    assert estimate.exponent >= 0.9
    assert not estimate.verdict.passed
    assert estimate.lags[-1] / estimate.lags[0] >= 10.0


def test_short_lag_range_is_rejected():
    growth = CoefficientSet(b=_const(0.5), sigma=_const(0.0), r=1.0, L_b=0.5, label="growth")
    traj = simulate_direct(gaussian_density(GRID, 0.25), growth, TIME, seed=0, dump_every=250)
    with pytest.raises(InsufficientDataError):
        holder_exponent(Ensemble([traj]), 2.0, HolderMode.TIME, 0.0)


def test_order_must_exceed_one(smooth_ensemble):
    with pytest.raises(DomainError):
        holder_exponent(smooth_ensemble, 1.0, "space")


@pytest.mark.slow
def test_kpz_exponents_fall_in_band():
    u0 = gaussian_density(GRID, 0.25)
    runs = [simulate_direct(u0, catalog("kpz"), TIME, seed=41, stream=i, dump_every=10) for i in range(500)]
    ensemble = Ensemble(runs)
    time_estimate = holder_exponent(ensemble, 2.0, "time")
    space_estimate = holder_exponent(ensemble, 2.0, "space")
    assert 0.15 <= time_estimate.exponent <= 0.35
    assert 0.35 <= space_estimate.exponent <= 0.65
    assert time_estimate.verdict.passed and space_estimate.verdict.passed
