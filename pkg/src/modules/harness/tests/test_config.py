"""Tests for run configuration, hashing and environment settings."""

import pytest
from pydantic import ValidationError

from src.modules.core import ConfigurationError
from src.modules.harness.config import LEMMA_SUITES, RunConfig, SuiteName
from src.modules.harness.settings import LabSettings
from src.modules.simulation import SchemeKind

BASE = {
    "coefficients": {"family": "kpz"},
    "grid": {"half_width": 3.0, "n_cells": 60},
    "time": {"horizon": 0.1, "dt": 0.004, "dump_interval": 0.02},
    "ensemble": {"replicas": 3, "seed": 7},
}


def make(**sections):
    data = {key: dict(value) for key, value in BASE.items()}
    for key, value in sections.items():
        data[key] = {**data.get(key, {}), **value}
    return RunConfig.model_validate(data)


def test_defaults_fill_missing_sections():
    config = make()
    assert config.scheme.kind is SchemeKind.DIRECT
    assert config.verify.suites == [SuiteName.MARTINGALE, SuiteName.QV]
    assert config.verify_times() == [0.1]
    assert config.time.n_dumps == 5


def test_time_grid_and_per_dump():
    time, per_dump = make().time_grid()
    assert per_dump == 5
    assert time.n_steps == 25
    assert time.dt == pytest.approx(0.004)


def test_slab_time_grid_divides_one_over_n():
    time, per_dump = make(scheme={"kind": "slab", "n": 4}).time_grid()
    steps_per_slab = round(0.25 / time.dt)
    assert steps_per_slab * time.dt == pytest.approx(0.25)
    assert time.n_steps == 5 * per_dump


def test_unstable_step_is_rejected():
    with pytest.raises(ValidationError, match="unstable"):
        make(time={"dt": 0.01})


def test_dump_interval_must_divide_horizon():
    with pytest.raises(ValidationError, match="dump_interval"):
        make(time={"dump_interval": 0.03})


def test_verify_times_must_be_dump_times():
    assert make(verify={"times": [0.04, 0.1]}).verify_times() == [0.04, 0.1]
    with pytest.raises(ValidationError, match="not a dump time"):
        make(verify={"times": [0.05]})


def test_observable_support_checked_against_grid():
    with pytest.raises(ValidationError, match="beyond the interior"):
        make(verify={"observables": [{"kind": "bump", "center": 1.5, "radius": 1.0}]})


def test_particle_scheme_needs_scale_and_first_slab():
    with pytest.raises(ValidationError, match="particles"):
        make(scheme={"kind": "particle", "particles": 10})
    with pytest.raises(ValidationError, match="first slab"):
        make(scheme={"kind": "particle", "particles": 200, "n": 20})
    config = make(scheme={"kind": "particle", "particles": 200, "n": 10})
    assert str(config.scheme.tag()) == "particle(200)"


def test_coefficient_sources_are_exclusive():
    with pytest.raises(ValidationError, match="mutually exclusive"):
        make(coefficients={"family": "kpz", "drift": "1", "noise": "u"})
    with pytest.raises(ValidationError, match="both drift and noise"):
        RunConfig.model_validate({**BASE, "coefficients": {"drift": "1"}})
    config = RunConfig.model_validate({**BASE, "coefficients": {"drift": "0.5", "noise": "sqrt(u)", "r": 0.5, "L_b": 0.5}})
    assert config.coefficient_set().label == "custom"


def test_bad_family_parameters_surface_on_build():
    config = make(coefficients={"family": "stepping_stone", "p": 0.1})
    with pytest.raises(ConfigurationError, match="p = 0"):
        config.coefficient_set()


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError):
        RunConfig.model_validate({**BASE, "colour": {}})


def test_hash_ignores_output_directory_only(tmp_path):
    config = make()
    assert make(output={"directory": str(tmp_path)}).config_hash() == config.config_hash()
    assert make(ensemble={"seed": 8}).config_hash() != config.config_hash()
    assert make(verify={"drift_offset": 0.5}).config_hash() != config.config_hash()
    assert make(grid={"n_cells": 62}).config_hash() != config.config_hash()


def test_with_updates_revalidates():
    config = make()
    assert config.with_updates("ensemble", replicas=9).ensemble.replicas == 9
    with pytest.raises(ValidationError):
        config.with_updates("time", dt=0.05)


def test_from_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        """
[coefficients]
family = "sbm"
beta = 0.5

[grid]
half_width = 3.0
n_cells = 60

[time]
horizon = 0.1
dt = 0.004
dump_interval = 0.02

[verify]
suites = ["mass_law", "gronwall"]
"""
    )
    config = RunConfig.from_toml(path)
    assert config.coefficients.beta == 0.5
    assert SuiteName.GRONWALL in LEMMA_SUITES
    assert config.verify.suites == [SuiteName.MASS_LAW, SuiteName.GRONWALL]


def test_initial_profiles():
    gaussian = make(initial={"kind": "gaussian", "mass": 2.0}).initial_field()
    assert gaussian.integral() == pytest.approx(2.0, rel=1e-6)
    bump = make(initial={"kind": "bump", "radius": 0.5, "mass": 1.0}).initial_field()
    assert bump.integral() == pytest.approx(1.0)
    assert make(initial={"kind": "zero"}).initial_field().integral() == 0.0
    with pytest.raises(ConfigurationError, match="initial.path"):
        make(initial={"kind": "csv"}).initial_field()


def test_settings_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv("SLAB_LAB_OUTPUT_ROOT", str(tmp_path))
    monkeypatch.setenv("SLAB_LAB_JOBS", "0")
    monkeypatch.setenv("SLAB_LAB_LOG_LEVEL", "debug")
    settings = LabSettings.from_env()
    assert settings.output_root == tmp_path
    assert settings.jobs == 1
    assert settings.log_level == "DEBUG"
