"""Tests for the counter-based noise generator."""

import numpy as np

from src.modules.simulation import NoiseRealization, noise_row, sample_noise


def test_same_index_same_value():
    assert sample_noise(11, 3, 40, 7) == sample_noise(11, 3, 40, 7)


def test_rows_are_prefix_stable_and_addressable():
    row = noise_row(5, 0, 12, 64)
    np.testing.assert_array_equal(noise_row(5, 0, 12, 16), row[:16])
    assert sample_noise(5, 0, 12, 20) == row[20]


def test_streams_steps_and_seeds_differ():
    base = noise_row(1, 0, 0, 32)
    assert not np.array_equal(base, noise_row(1, 1, 0, 32))
    assert not np.array_equal(base, noise_row(1, 0, 1, 32))
    assert not np.array_equal(base, noise_row(2, 0, 0, 32))


def test_particle_stream_is_separate_from_field_rows():
    noise = NoiseRealization(seed=9, stream=2)
    draws = noise.particle_generator().standard_normal(32)
    assert not np.array_equal(draws, noise.row(0, 32))


def test_million_variates_are_standard_normal():
    samples = np.concatenate([noise_row(2024, 0, m, 1000) for m in range(1000)])
    assert abs(samples.mean()) < 4e-3
    assert abs(samples.var() - 1.0) < 6e-3


def test_rows_are_uncorrelated():
    a = np.concatenate([noise_row(3, 0, m, 500) for m in range(0, 400, 2)])
    b = np.concatenate([noise_row(3, 0, m, 500) for m in range(1, 400, 2)])
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02
