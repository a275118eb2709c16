"""Tests for replica execution, ensemble orchestration and run directories."""

import numpy as np
import pytest

from src.modules.harness import runner
from src.modules.harness.config import RunConfig
from src.modules.harness.runner import load_run, run_ensemble, run_replica, write_run
from src.modules.simulation import ParticleSystem, TrajectoryField


def make(replicas=3, **sections):
    data = {
        "coefficients": {"family": "kpz"},
        "grid": {"half_width": 3.0, "n_cells": 60},
        "time": {"horizon": 0.1, "dt": 0.004, "dump_interval": 0.02},
        "ensemble": {"replicas": replicas, "seed": 11},
    }
    for key, value in sections.items():
        data[key] = {**data.get(key, {}), **value}
    return RunConfig.model_validate(data)


def test_replica_is_deterministic():
    a, b = run_replica(make(), 1), run_replica(make(), 1)
    assert isinstance(a, TrajectoryField)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.stream == 1 and a.seed == 11
    assert a.n_dumps == 6


def test_replica_independent_of_replica_count():
    small = run_ensemble(make(replicas=2))
    large = run_ensemble(make(replicas=5))
    np.testing.assert_array_equal(small.results[0].values, large.results[0].values)
    np.testing.assert_array_equal(small.results[1].values, large.results[1].values)
    assert not np.array_equal(large.results[0].values, large.results[1].values)


def test_slab_and_particle_replicas():
    slab = run_replica(make(scheme={"kind": "slab", "n": 4}), 0)
    assert slab.scheme.n == 4
    particles = run_replica(make(scheme={"kind": "particle", "particles": 200, "n": 10}), 0)
    assert isinstance(particles[0], ParticleSystem)
    assert [round(ps.time, 12) for ps in particles] == [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]


def test_progress_callback_sees_every_replica():
    seen = []
    run_ensemble(make(replicas=3), on_replica=seen.append)
    assert sorted(seen) == [0, 1, 2]


def test_worker_failure_gives_partial_manifest(tmp_path, monkeypatch):
    real = runner.run_replica

    def flaky(config, replica, **kwargs):
        if replica == 1:
            raise FloatingPointError("injected")
        return real(config, replica, **kwargs)

    monkeypatch.setattr(runner, "run_replica", flaky)
    run = run_ensemble(make(replicas=3))
    assert sorted(run.results) == [0, 2]
    assert "injected" in run.failures[1]
    manifest = write_run(run, tmp_path)
    assert manifest.status == "partial"
    assert [r.status for r in manifest.replicas] == ["completed", "failed", "completed"]


def test_write_and_load_run(tmp_path):
    config = make(replicas=2)
    run = run_ensemble(config)
    manifest = write_run(run, tmp_path)
    assert manifest.config_hash == config.config_hash()
    assert manifest.status == "complete"
    assert all((tmp_path / name).is_file() for name in manifest.files)
    loaded_manifest, loaded_config, loaded = load_run(tmp_path / "manifest.json")
    assert loaded_config == config
    assert loaded_manifest.seeds == [(11, 0), (11, 1)]
    np.testing.assert_array_equal(loaded.results[1].values, run.results[1].values)


def test_rerun_has_identical_checksums(tmp_path):
    config = make(replicas=2)
    first = write_run(run_ensemble(config), tmp_path / "a")
    second = write_run(run_ensemble(config), tmp_path / "b")
    assert [r.checksum for r in first.replicas] == [r.checksum for r in second.replicas]


@pytest.mark.slow
def test_pool_matches_serial():
    config = make(replicas=4)
    serial = run_ensemble(config)
    pooled = run_ensemble(config, jobs=2)
    for i in range(4):
        np.testing.assert_array_equal(serial.results[i].values, pooled.results[i].values)
