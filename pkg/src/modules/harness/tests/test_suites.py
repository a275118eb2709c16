"""Tests for the verification suites run by the harness."""

import dataclasses

import pytest

from src.modules.core import SuiteMismatchError
from src.modules.harness.config import RunConfig, SuiteName
from src.modules.harness.runner import EnsembleRun, run_ensemble
from src.modules.harness.suites import check_compatible, run_lemma_suites, run_suites
from src.modules.simulation import RunStatus, SchemeKind

NOISELESS = {"drift": "0.5", "noise": "0", "r": 1.0, "L_b": 0.5}


def make(coefficients, replicas=2, **sections):
    data = {
        "coefficients": coefficients,
        "grid": {"half_width": 4.0, "n_cells": 80},
        "time": {"horizon": 0.1, "dt": 0.004, "dump_interval": 0.004},
        "ensemble": {"replicas": replicas, "seed": 5},
        "verify": {"min_replicas": 2, "observables": [{"kind": "one"}, {"kind": "bump", "radius": 2.0}]},
    }
    for key, value in sections.items():
        data[key] = {**data.get(key, {}), **value}
    return RunConfig.model_validate(data)


@pytest.fixture(scope="module")
def noiseless():
    config = make(NOISELESS)
    return config, run_ensemble(config)


def test_incompatible_suites_are_reported():
    with pytest.raises(SuiteMismatchError, match="particle run"):
        check_compatible([SuiteName.PARTICLE_VARIANCE], SchemeKind.DIRECT)
    with pytest.raises(SuiteMismatchError, match="holder"):
        check_compatible([SuiteName.HOLDER, SuiteName.QV], SchemeKind.PARTICLE)
    check_compatible([SuiteName.MARTINGALE, SuiteName.MASS_LAW], SchemeKind.PARTICLE)


def test_ensemble_suites_need_a_run(noiseless):
    config, _ = noiseless
    with pytest.raises(SuiteMismatchError, match="manifest"):
        run_suites(config, None, [SuiteName.MARTINGALE])


def test_noiseless_run_passes_every_field_suite(noiseless):
    config, run = noiseless
    suites = [SuiteName.MARTINGALE, SuiteName.QV, SuiteName.DOMINATION, SuiteName.MASS_LAW, SuiteName.MOMENTS]
    outcome = run_suites(config, run, suites)
    failed = [v.test_id for v in outcome.verdicts if not v.passed]
    assert failed == []
    ids = {v.test_id for v in outcome.verdicts}
    assert {"martingale/one", "qv/one", "mass_law", "moments/nu/q=1", "moments/nu/q=2"} <= ids
    assert set(outcome.frames) == {"martingale_series", "moments"}
    series = outcome.frames["martingale_series"]
    assert set(series["observable"]) == {"one", "bump(0,2)"}


def test_drift_offset_is_detected(noiseless):
    config, run = noiseless
    shifted = config.with_updates("verify", drift_offset=1.0)
    outcome = run_suites(shifted, run, [SuiteName.MARTINGALE])
    assert not outcome.passed


def test_stopped_replicas_are_counted_in_verdicts(noiseless):
    config, run = noiseless
    first, second = run.trajectories()
    stopped = dataclasses.replace(first, status=RunStatus.STOPPED, stop_step=3)
    partial = EnsembleRun(config=config, results={0: stopped, 1: first, 2: second})
    outcome = run_suites(config, partial, [SuiteName.MARTINGALE, SuiteName.DOMINATION])
    assert outcome.verdicts
    assert all(v.details["dropped_replicas"] == 1 for v in outcome.verdicts)
    assert all(v.details["dropped_replicas"] == 0 for v in run_suites(config, run, [SuiteName.MARTINGALE]).verdicts)


def test_mass_law_needs_constant_drift():
    config = make({"family": "contact_limit", "theta": 1.0})
    run = run_ensemble(config)
    with pytest.raises(SuiteMismatchError, match="constant drift"):
        run_suites(config, run, [SuiteName.MASS_LAW])


def test_mild_suite_on_fine_noiseless_grid():
    config = make(
        NOISELESS,
        grid={"half_width": 2.0, "n_cells": 200},
        time={"horizon": 0.01, "dt": 1e-4, "dump_interval": 0.002},
        verify={"observables": [{"kind": "one"}]},
    )
    outcome = run_suites(config, run_ensemble(config), [SuiteName.MILD])
    assert [v.test_id for v in outcome.verdicts] == ["mild/residual"]
    assert outcome.passed
    assert len(outcome.frames["mild_residuals"]) == 2


def test_mild_suite_replays_the_whole_ensemble_unless_capped():
    config = make(
        NOISELESS,
        replicas=18,
        grid={"half_width": 2.0, "n_cells": 100},
        time={"horizon": 0.01, "dt": 2e-4, "dump_interval": 0.01},
        verify={"observables": [{"kind": "one"}]},
    )
    run = run_ensemble(config)
    outcome = run_suites(config, run, [SuiteName.MILD])
    assert outcome.frames["mild_residuals"]["replica"].tolist() == list(range(18))
    assert outcome.verdicts[0].details["replicas"] == 18
    capped = config.with_updates("verify", mild_replicas=4)
    verdict = run_suites(capped, run, [SuiteName.MILD]).verdicts[0]
    assert verdict.details["replicas"] == 4 and verdict.details["requested"] == 4


def test_particle_suites():
    config = make(
        {"family": "sbm", "beta": 0.0},
        replicas=4,
        scheme={"kind": "particle", "particles": 200, "n": 10},
        time={"horizon": 0.1, "dt": 0.004, "dump_interval": 0.02},
    )
    outcome = run_suites(config, run_ensemble(config), [SuiteName.MARTINGALE, SuiteName.MASS_LAW, SuiteName.PARTICLE_VARIANCE])
    ids = [v.test_id for v in outcome.verdicts]
    assert ids.count("mass_law") == 1 and ids.count("particle_variance") == 1
    assert "martingale/one" in ids


def test_particle_variance_rejects_supercritical_runs():
    config = make(
        {"family": "sbm", "beta": 0.5},
        scheme={"kind": "particle", "particles": 200, "n": 10},
        time={"horizon": 0.1, "dt": 0.004, "dump_interval": 0.02},
    )
    with pytest.raises(SuiteMismatchError, match="b = 0"):
        run_suites(config, run_ensemble(config), [SuiteName.PARTICLE_VARIANCE])


def test_gronwall_suite_standalone():
    config = make(NOISELESS, moments={"gronwall_c": [0.25, 1.0], "gronwall_points": 201})
    outcome = run_lemma_suites(config, [SuiteName.GRONWALL])
    assert [v.test_id for v in outcome.verdicts] == [
        "gronwall/f=one/c=0.25",
        "gronwall/f=one/c=1",
        "gronwall/f=t/c=0.25",
        "gronwall/f=t/c=1",
    ]
    assert outcome.passed
    frame = outcome.frames["gronwall"]
    assert (frame["g_star"] <= frame["bound"] + 1e-12).all()


def test_kernel_suite_without_config():
    outcome = run_lemma_suites(None, [])
    assert outcome.verdicts == [] and outcome.frames == {}


@pytest.mark.slow
def test_kernel_suite_default_sweep():
    config = make(NOISELESS, moments={"kernel_T": [0.5], "kernel_lam": [1.0]})
    outcome = run_lemma_suites(config, [SuiteName.KERNEL_LEMMA])
    assert [v.test_id for v in outcome.verdicts] == ["kernel_lemma/T=0.5/lambda=1"]
    assert set(outcome.frames["kernel_lemma"]["T"]) == {0.5}


def test_cross_check_runs_from_config_alone():
    config = make(
        {"drift": "0", "noise": "0", "r": 1.0},
        replicas=4,
        scheme={"kind": "particle", "particles": 400, "n": 10},
        time={"horizon": 0.1, "dt": 0.004, "dump_interval": 0.02},
        verify={"observables": [{"kind": "one"}]},
    )
    outcome = run_suites(config, None, [SuiteName.CROSS_CHECK])
    assert [v.test_id for v in outcome.verdicts] == ["cross_check/one"]
    assert outcome.passed
    assert outcome.verdicts[0].details["flagged_cells"] == 0
    assert outcome.frames["cross_check"]["slab_var"].tolist() == [0.0]


def test_cross_check_needs_a_particle_config(noiseless):
    config, _ = noiseless
    with pytest.raises(SuiteMismatchError, match="particle run"):
        run_suites(config, None, [SuiteName.CROSS_CHECK])
