"""Tests for the heat kernel and the discrete heat semigroup."""

import numpy as np
import pytest
from scipy.integrate import quad

from src.modules.core import (
    DomainError,
    GridSpec,
    ScalarField,
    SingularityError,
    gaussian_density,
    heat_convolve,
    heat_kernel,
)


def test_heat_kernel_values():
    assert heat_kernel(1.0, 0.0) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))
    assert heat_kernel(1.0, 0.0) == pytest.approx(0.398942, abs=1e-6)
    assert heat_kernel(-0.5, 1.3) == 0.0
    assert heat_kernel(2.0, 2.0) == pytest.approx(np.exp(-1.0) / np.sqrt(4.0 * np.pi))
    assert heat_kernel(2.0, 2.0) == pytest.approx(0.103777, abs=1e-6)


def test_heat_kernel_at_time_zero():
    assert heat_kernel(0.0, 0.5) == 0.0
    with pytest.raises(SingularityError):
        heat_kernel(0.0, 0.0)


@pytest.mark.parametrize("t", [0.01, 0.5, 3.0])
def test_heat_kernel_has_unit_mass(t):
    width = 20.0 * np.sqrt(t)
    mass, _ = quad(lambda x: heat_kernel(t, x), -width, width, epsabs=1e-13, epsrel=1e-12, points=[0.0])
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_convolve_identity_and_zero():
    grid = GridSpec(half_width=4.0, n_cells=64)
    f = gaussian_density(grid, 0.5)
    assert heat_convolve(f, 0.0) is f
    zero = ScalarField.zeros(grid)
    np.testing.assert_array_equal(heat_convolve(zero, 0.3).values, 0.0)


def test_convolve_rejects_negative_time():
    grid = GridSpec(half_width=4.0, n_cells=64)
    with pytest.raises(DomainError):
        heat_convolve(ScalarField.zeros(grid), -0.1)


def test_convolve_gaussian_oracle():
    """A variance-0.5 Gaussian smoothed for t = 0.5 is the variance-1 Gaussian."""
    grid = GridSpec(half_width=10.0, n_cells=2048)
    smoothed = heat_convolve(gaussian_density(grid, 0.5), 0.5)
    exact = gaussian_density(grid, 1.0)
    assert np.max(np.abs(smoothed.values - exact.values)) <= 1e-6


def test_convolve_preserves_mass_and_sign():
    grid = GridSpec(half_width=10.0, n_cells=512)
    f = gaussian_density(grid, 0.3, center=1.0, mass=2.0)
    g = heat_convolve(f, 0.7)
    assert g.integral() == pytest.approx(f.integral(), rel=1e-8)
    assert np.all(g.values >= 0.0)


def test_convolve_semigroup_property():
    grid = GridSpec(half_width=10.0, n_cells=2048)
    bump = ScalarField.from_function(
        grid, lambda x: np.where(np.abs(x) < 1.0, np.cos(0.5 * np.pi * x) ** 4, 0.0)
    )
    two_step = heat_convolve(heat_convolve(bump, 0.2), 0.3)
    one_step = heat_convolve(bump, 0.5)
    assert np.max(np.abs(two_step.values - one_step.values)) <= 1e-6
