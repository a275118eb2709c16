"""Tests for grids, sampled fields and the weighted sup norm."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.modules.core import (
    ConfigurationError,
    GridSpec,
    InvalidFieldError,
    ScalarField,
    TimeGrid,
    rap_norm,
)


def test_grid_points_and_spacing():
    """The grid runs from -L to L in J cells and contains x = 0."""
    grid = GridSpec(half_width=5.0, n_cells=100)
    assert grid.dx == pytest.approx(0.1)
    assert grid.x[0] == -5.0 and grid.x[-1] == 5.0
    assert grid.x[grid.index_of(0.0)] == pytest.approx(0.0)


@pytest.mark.parametrize("kwargs", [{"half_width": 0.0, "n_cells": 16}, {"half_width": 1.0, "n_cells": 6}, {"half_width": 1.0, "n_cells": 17}])
def test_grid_rejects_invalid_shapes(kwargs):
    with pytest.raises(ValidationError):
        GridSpec(**kwargs)


def test_time_grid_stability():
    """dt <= dx^2/2 is accepted at equality and rejected above it."""
    grid = GridSpec(half_width=1.0, n_cells=100)  # dx = 0.02
    TimeGrid(horizon=0.5, n_steps=2500).check_stability(grid)
    with pytest.raises(ConfigurationError, match="unstable"):
        TimeGrid(horizon=0.5, n_steps=2000).check_stability(grid)


def test_rap_norm_zero_field():
    grid = GridSpec(half_width=5.0, n_cells=100)
    assert rap_norm(ScalarField.zeros(grid), 3.0) == 0.0


def test_rap_norm_supremum_at_origin():
    grid = GridSpec(half_width=5.0, n_cells=100)
    f = ScalarField.from_function(grid, lambda x: np.exp(-2.0 * np.abs(x)))
    assert rap_norm(f, 1.0) == pytest.approx(1.0)


def test_rap_norm_supremum_at_boundary():
    grid = GridSpec(half_width=5.0, n_cells=100)
    f = ScalarField.from_function(grid, lambda x: np.exp(-np.abs(x)))
    assert rap_norm(f, 2.0) == pytest.approx(np.exp(5.0), rel=1e-12)
    assert rap_norm(f, 2.0) == pytest.approx(148.413, rel=1e-5)


def test_rap_norm_is_sup_norm_at_zero_and_monotone_in_p():
    grid = GridSpec(half_width=4.0, n_cells=64)
    rng = np.random.default_rng(7)
    f = ScalarField(grid=grid, values=rng.normal(size=grid.n_points))
    assert rap_norm(f, 0.0) == pytest.approx(np.max(np.abs(f.values)))
    norms = [rap_norm(f, p) for p in (0.0, 0.5, 1.0, 2.0)]
    assert norms == sorted(norms)


def test_rap_norm_rejects_non_finite_entries():
    grid = GridSpec(half_width=1.0, n_cells=8)
    values = np.zeros(grid.n_points)
    values[3] = np.nan
    with pytest.raises(InvalidFieldError):
        rap_norm(values, 1.0, grid=grid)
    with pytest.raises(InvalidFieldError):
        ScalarField(grid=grid, values=values)


def test_nonnegative_flag_is_enforced():
    grid = GridSpec(half_width=1.0, n_cells=8)
    values = np.zeros(grid.n_points)
    values[2] = -1e-3
    with pytest.raises(InvalidFieldError, match="negative"):
        ScalarField(grid=grid, values=values, nonnegative=True)


def test_csv_round_trip_keeps_header(tmp_path):
    grid = GridSpec(half_width=2.0, n_cells=16)
    f = ScalarField.from_function(grid, np.cos)
    path = tmp_path / "field.csv"
    f.to_csv(path)
    assert path.read_text().splitlines()[0] == "x,value"
    g = ScalarField.read_csv(path, grid)
    np.testing.assert_array_equal(g.values, f.values)
