"""Tests for the heat-kernel difference functional and its sweep."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.modules.core import DomainError, heat_kernel
from src.modules.verification import KernelSweepGrid, kernel_diff_functional, kernel_lemma_sweep


def _p0(a):
    return 1.0 / math.sqrt(2.0 * math.pi * a)


def test_identical_pairs_vanish():
    assert kernel_diff_functional(0.4, 0.4, 0.3, 0.3, 1.0) == 0.0


def test_time_offset_oracle():
    t, t2 = 0.5, 0.6
    expected = (math.sqrt(t) + math.sqrt(t2) - math.sqrt(t2 - t)) / math.sqrt(math.pi) - 2.0 * (
        math.sqrt(t + t2) - math.sqrt(t2 - t)
    ) / math.sqrt(2.0 * math.pi)
    assert kernel_diff_functional(t, t2, 0.0, 0.0, 0.0) == pytest.approx(expected, abs=1e-6)


def test_space_offset_oracle():
    t = 0.5
    cross, _ = quad(lambda a: heat_kernel(2.0 * a, 1.0), 0.0, t)
    expected = 2.0 * math.sqrt(t) / math.sqrt(math.pi) - 2.0 * cross
    assert kernel_diff_functional(t, t, 0.0, 1.0, 0.0) == pytest.approx(expected, abs=1e-6)


def test_weighted_case_matches_nested_quadrature():
    t, t2, x, x2, lam = 0.3, 0.5, 0.2, -0.3, 1.0

    def inner(w):
        a = w * w
        b = a + (t2 - t)
        value, _ = quad(
            lambda y: (heat_kernel(a, y - x) - heat_kernel(b, y - x2)) ** 2 * math.exp(-lam * abs(y)),
            -12.0,
            12.0,
            points=[x, x2, 0.0],
            limit=200,
        )
        return 2.0 * w * value

    expected, _ = quad(inner, 0.0, math.sqrt(t), limit=200)
    assert kernel_diff_functional(t, t2, x, x2, lam) == pytest.approx(expected, rel=1e-5)


def test_reflection_symmetry_without_weight():
    center = 0.2
    direct = kernel_diff_functional(0.3, 0.45, 0.3, 0.8, 0.0)
    reflected = kernel_diff_functional(0.3, 0.45, 2 * center - 0.3, 2 * center - 0.8, 0.0)
    assert reflected == pytest.approx(direct, rel=1e-9)


def test_mirror_symmetry_with_weight():
    assert kernel_diff_functional(0.3, 0.45, 0.3, 0.8, 1.5) == pytest.approx(
        kernel_diff_functional(0.3, 0.45, -0.3, -0.8, 1.5), rel=1e-9
    )


def test_weight_decreases_functional():
    small = kernel_diff_functional(0.4, 0.7, 0.0, 0.0, 1.0)
    large = kernel_diff_functional(0.4, 0.7, 0.0, 0.0, 2.0)
    assert 0.0 < large < small


def test_argument_errors():
    with pytest.raises(DomainError):
        kernel_diff_functional(0.0, 0.5, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        kernel_diff_functional(0.5, 0.4, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        kernel_diff_functional(0.5, 0.6, 0.0, 0.0, -1.0)
    with pytest.raises(DomainError):
        kernel_lemma_sweep(1.0, 0.0, KernelSweepGrid.default(3))


@pytest.mark.parametrize("T", [0.5, 1.0])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_sweep_ratios_stay_bounded(T, lam):
    result = kernel_lemma_sweep(T, lam, KernelSweepGrid.default(4))
    assert result.verdict.passed
    assert np.isfinite(result.c_hat) and result.c_hat > 0.0
    assert result.fine_max <= 2.0 * result.c_hat


def test_sweep_excludes_identical_pairs():
    rows = kernel_lemma_sweep(1.0, 1.0, KernelSweepGrid.default(3)).rows
    identical = (rows["t"] == rows["t2"]) & (rows["x"] == rows["x2"])
    assert not identical.any()
    assert (rows["x2"] - rows["x"]).abs().max() <= 1.0
    assert list(rows.columns) == ["t", "t2", "x", "x2", "lam", "scale", "functional", "ratio"]


@pytest.mark.slow
def test_full_sweep_baseline():
    result = kernel_lemma_sweep(1.0, 1.0, jobs=2)
    assert result.verdict.passed
    assert len(result.rows) > 1000
