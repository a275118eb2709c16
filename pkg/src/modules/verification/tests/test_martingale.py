"""Tests for Z_t(phi), its quadratic variations and the ensemble verdicts."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.modules.coefficients import CoefficientSet, catalog, custom_coefficients, regularized
from src.modules.core import (
    ConfigurationError,
    GridSpec,
    InsufficientDataError,
    ScalarField,
    SuiteMismatchError,
    TimeGrid,
    gaussian_density,
)
from src.modules.simulation import Ensemble, ParticleSystem, simulate_direct, simulate_slab
from src.modules.verification.martingale import MartingaleSeries
from src.modules.verification import (
    bump,
    constant,
    domination_check,
    mass_law_check,
    martingale_test,
    particle_variance_verdict,
    qv_compare,
    z_process,
    z_process_particles,
)


def _const(value):
    return lambda u: np.full_like(np.asarray(u, dtype=float), value)


def deterministic(beta=0.0):
    return CoefficientSet(b=_const(beta), sigma=_const(0.0), r=1.0, L_b=max(beta, 0.0), l_b=max(-beta, 0.0), label="deterministic")


@pytest.fixture(scope="module")
def smooth_run():
    grid = GridSpec(half_width=4.0, n_cells=400)
    time = TimeGrid(horizon=0.1, n_steps=1000)
    return simulate_direct(gaussian_density(grid, 0.25), deterministic(), time, seed=0, dump_every=10)


@pytest.fixture(scope="module")
def kpz_run():
    grid = GridSpec(half_width=5.0, n_cells=100)
    time = TimeGrid(horizon=0.25, n_steps=50)
    return simulate_direct(gaussian_density(grid, 0.25), catalog("kpz"), time, seed=3)


def test_z_starts_at_zero_and_predicted_qv_grows(kpz_run):
    series = z_process(kpz_run, bump(kpz_run.grid, 0.0, 2.0), catalog("kpz"))
    assert series.z[0] == 0.0
    assert series.realized_qv[0] == 0.0
    assert np.all(np.diff(series.predicted_qv) >= 0.0)
    assert np.all(series.realized_qv >= 0.0)


def test_negated_observable_negates_z(kpz_run):
    observable = bump(kpz_run.grid, 0.5, 2.0)
    plus = z_process(kpz_run, observable, catalog("kpz"))
    minus = z_process(kpz_run, -observable, catalog("kpz"))
    np.testing.assert_allclose(minus.z, -plus.z, atol=1e-14)
    np.testing.assert_allclose(minus.predicted_qv, plus.predicted_qv)


def test_noiseless_run_has_negligible_z(smooth_run):
    for observable in (constant(smooth_run.grid), bump(smooth_run.grid, 0.0, 2.0)):
        series = z_process(smooth_run, observable, deterministic())
        assert np.max(np.abs(series.z)) <= 1e-3
        np.testing.assert_array_equal(series.predicted_qv, 0.0)


def test_constant_observable_tracks_mass(smooth_run):
    series = z_process(smooth_run, constant(smooth_run.grid), deterministic())
    masses = smooth_run.masses()
    np.testing.assert_allclose(series.z, masses - masses[0], atol=1e-14)


def test_drift_offset_shifts_z(smooth_run):
    observable = bump(smooth_run.grid, 0.0, 2.0)
    base = z_process(smooth_run, observable, deterministic())
    shifted = z_process(smooth_run, observable, deterministic(), drift_offset=0.5)
    dt = np.diff(smooth_run.times)
    expected = -0.5 * np.concatenate([[0.0], np.cumsum(base.pairing[:-1] * dt)])
    np.testing.assert_allclose(shifted.z - base.z, expected, atol=1e-12)


def test_observable_outside_interior_is_rejected(kpz_run):
    with pytest.raises(ConfigurationError):
        z_process(kpz_run, bump(kpz_run.grid, 3.0, 1.5), catalog("kpz"))


def test_slab_run_predicts_qv_from_frozen_profile():
    grid = GridSpec(half_width=5.0, n_cells=100)
    time = TimeGrid(horizon=0.25, n_steps=50)
    c = catalog("kpz")
    traj = simulate_slab(gaussian_density(grid, 0.25), c, 4, time, seed=9)
    observable = bump(grid, 0.0, 2.0)
    series = z_process(traj, observable, c)
    u0 = traj.values[0]
    dt = time.dt
    # gamma(u) = u for kpz, so inside the first slab the QV density is u0 * u.
    expected = np.cumsum([dt * trapezoid(u0 * traj.values[k] * observable.phi**2, dx=grid.dx) for k in range(12)])
    np.testing.assert_allclose(series.predicted_qv[1:13], expected, rtol=1e-12)


def test_series_frame_columns(kpz_run):
    frame = z_process(kpz_run, constant(kpz_run.grid), catalog("kpz")).to_frame()
    assert list(frame.columns) == ["time", "pairing", "z", "predicted_qv", "realized_qv"]
    assert len(frame) == kpz_run.n_dumps


def test_martingale_test_needs_replicas(kpz_run):
    series = z_process(kpz_run, constant(kpz_run.grid), catalog("kpz"))
    with pytest.raises(InsufficientDataError):
        martingale_test([series] * 10, 0.25)
    with pytest.raises(InsufficientDataError):
        qv_compare([series] * 10, 0.25)


def test_noiseless_ensemble_passes_trivially(smooth_run):
    series = z_process(smooth_run, bump(smooth_run.grid, 0.0, 2.0), deterministic())
    assert martingale_test([series] * 200, 0.1).passed
    verdict = qv_compare([series] * 200, 0.1)
    assert verdict.passed
    assert verdict.details["predicted"] == 0.0


def synthetic_series(realized_end, count=64, seed=0):
    rng = np.random.default_rng(seed)
    times = np.array([0.0, 1.0])
    return [
        MartingaleSeries(
            observable="one",
            times=times,
            pairing=np.ones(2),
            z=np.array([0.0, sign]),
            predicted_qv=times.copy(),
            realized_qv=np.array([0.0, value]),
        )
        for sign, value in zip(np.resize([1.0, -1.0], count), realized_end(rng, count))
    ]


def test_qv_ratio_outside_band_fails_despite_large_spread():
    series = synthetic_series(lambda rng, n: 1.4 + 10.0 * np.resize([1.0, -1.0], n))
    verdict = qv_compare(series, 1.0, min_replicas=2)
    assert not verdict.passed
    assert verdict.threshold == 1.15


def test_qv_ratio_inside_band_passes():
    series = synthetic_series(lambda rng, n: 1.0 + 0.05 * np.resize([1.0, -1.0], n))
    verdict = qv_compare(series, 1.0, min_replicas=2)
    assert verdict.passed
    assert verdict.details["gap_passed"]


def test_qv_gap_beyond_three_se_fails_inside_band():
    series = synthetic_series(lambda rng, n: np.full(n, 1.1) + 1e-4 * rng.standard_normal(n))
    verdict = qv_compare(series, 1.0, min_replicas=2)
    assert 0.85 <= verdict.statistic <= 1.15
    assert not verdict.details["gap_passed"] and not verdict.passed


def test_domination_saturates_for_constant_drift():
    grid = GridSpec(half_width=6.0, n_cells=300)
    time = TimeGrid(horizon=0.25, n_steps=500)
    traj = simulate_direct(gaussian_density(grid, 0.25), deterministic(0.5), time, seed=0, dump_every=50)
    ensemble = Ensemble([traj, traj])
    verdict = domination_check(ensemble, bump(grid, 0.0, 2.0), 0.25, 0.5)
    assert verdict.passed
    assert verdict.details["ratio"] == pytest.approx(1.0, rel=1e-2)


def test_domination_slack_grows_with_l_b():
    grid = GridSpec(half_width=6.0, n_cells=300)
    time = TimeGrid(horizon=0.25, n_steps=500)
    traj = simulate_direct(gaussian_density(grid, 0.25), deterministic(), time, seed=0, dump_every=50)
    verdict = domination_check(Ensemble([traj, traj]), bump(grid, 0.0, 2.0), 0.25, 1.0)
    assert verdict.passed
    assert verdict.details["ratio"] == pytest.approx(np.exp(-0.25), rel=1e-2)


def test_mass_law_rejects_mismatched_drift(kpz_run):
    with pytest.raises(SuiteMismatchError):
        mass_law_check(Ensemble([kpz_run, kpz_run]), 0.3, 0.25, catalog("sbm", beta=0.5))
    with pytest.raises(SuiteMismatchError):
        mass_law_check(Ensemble([kpz_run, kpz_run]), 0.0, 0.25, catalog("contact_limit", theta=1.0))


def test_mass_law_on_deterministic_growth():
    grid = GridSpec(half_width=6.0, n_cells=300)
    time = TimeGrid(horizon=0.5, n_steps=1000)
    traj = simulate_direct(gaussian_density(grid, 0.25), deterministic(-1.0), time, seed=0, dump_every=100)
    verdict = mass_law_check(Ensemble([traj, traj]), -1.0, 0.5, deterministic(-1.0))
    assert verdict.passed
    assert verdict.statistic == pytest.approx(1.0, abs=1e-3)


def test_particle_variance_verdict():
    rng = np.random.default_rng(11)
    masses = rng.normal(1.0, np.sqrt(0.5), size=4000)
    assert particle_variance_verdict(masses, 1.0, 0.5).passed
    assert not particle_variance_verdict(masses, 1.0, 1.0).passed
    with pytest.raises(InsufficientDataError):
        particle_variance_verdict(masses[:1], 1.0, 0.5)


def test_particle_series_without_branching():
    grid = GridSpec(half_width=5.0, n_cells=100)
    zeros = ScalarField.zeros(grid)
    snapshots = [
        ParticleSystem(positions=np.array([0.0, 0.5]), scale=100, time=0.0),
        ParticleSystem(positions=np.array([0.1, 0.4]), scale=100, time=0.1),
    ]
    series = z_process_particles(snapshots, constant(grid), zeros, zeros)
    assert series.z[0] == 0.0
    np.testing.assert_allclose(series.z, 0.0, atol=1e-15)
    np.testing.assert_array_equal(series.predicted_qv, 0.0)


def _series(c, observable_radius, replicas, *, n=None, **kwargs):
    grid = GridSpec(half_width=5.0, n_cells=100)
    time = TimeGrid(horizon=0.25, n_steps=50)
    u0 = gaussian_density(grid, 0.25)
    observable = bump(grid, 0.0, observable_radius) if observable_radius else constant(grid)
    if n is None:
        runs = [simulate_direct(u0, c, time, seed=21, stream=i) for i in range(replicas)]
    else:
        runs = [simulate_slab(u0, c, n, time, seed=21, stream=i) for i in range(replicas)]
    return [z_process(run, observable, c, **kwargs) for run in runs]


def _kpz_series(observable_radius, replicas, **kwargs):
    return _series(catalog("kpz"), observable_radius, replicas, **kwargs)


@pytest.mark.slow
def test_kpz_martingale_passes_and_wrong_drift_fails():
    assert martingale_test(_kpz_series(2.0, 600), 0.25).passed
    assert not martingale_test(_kpz_series(2.0, 600, drift_offset=0.5), 0.25).passed


@pytest.mark.slow
def test_kpz_quadratic_variation_matches():
    verdict = qv_compare(_kpz_series(None, 600), 0.25)
    assert verdict.passed
    assert 0.85 <= verdict.statistic <= 1.15


@pytest.mark.slow
def test_supercritical_mass_law():
    grid = GridSpec(half_width=5.0, n_cells=100)
    time = TimeGrid(horizon=0.5, n_steps=100)
    c = catalog("sbm", beta=0.5)
    u0 = gaussian_density(grid, 0.25)
    runs = [simulate_direct(u0, c, time, seed=5, stream=i, dump_every=100) for i in range(1000)]
    verdict = mass_law_check(Ensemble(runs), 0.5, 0.5, c)
    assert verdict.passed
    assert verdict.details["target"] == pytest.approx(np.exp(0.25) * u0.integral())


@pytest.mark.slow
def test_sbm_total_mass_quadratic_variation_matches():
    verdict = qv_compare(_series(catalog("sbm"), None, 600), 0.25)
    assert verdict.passed, verdict
    assert 0.85 <= verdict.statistic <= 1.15


@pytest.mark.slow
def test_contact_limit_stays_below_the_heat_flow_bound():
    grid = GridSpec(half_width=5.0, n_cells=100)
    time = TimeGrid(horizon=0.25, n_steps=50)
    c = catalog("contact_limit", theta=1.0)
    u0 = gaussian_density(grid, 0.25)
    runs = [simulate_direct(u0, c, time, seed=17, stream=i) for i in range(400)]
    verdict = domination_check(Ensemble(runs), bump(grid, 0.0, 2.0), 0.25, c.L_b)
    assert verdict.passed, verdict
    assert verdict.details["ratio"] <= 1.0


@pytest.mark.slow
def test_regularized_rough_noise_on_slabs():
    rough = custom_coefficients("0", "u**0.3 + u", r=0.3, L_sigma=1.0)
    c = regularized(rough, 8)
    series = _series(c, 2.0, 600, n=8)
    assert martingale_test(series, 0.25).passed
    verdict = qv_compare(series, 0.25)
    assert verdict.passed, verdict
