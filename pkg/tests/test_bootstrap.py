"""Moving-block bootstrap resampling of time-series means."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailrisk.bootstrap import block_starts, default_block_length, resample_means


class TestDefaultBlockLength:
    @pytest.mark.parametrize(
        "P,expected", [(1, 1), (8, 2), (27, 3), (251, 7), (1000, 10), (2500, 14)]
    )
    def test_cube_root_rule(self, P, expected):
        assert default_block_length(P) == expected

    def test_clamped_to_series_length(self):
        assert default_block_length(2) == 2


class TestBlockStarts:
    def test_shape_and_range(self, rng):
        starts = block_starts(100, 7, 50, rng)
        assert starts.shape == (50, 15)  # ceil(100 / 7)
        assert starts.min() >= 0
        assert starts.max() <= 100 - 7

    def test_invalid_block_length(self, rng):
        with pytest.raises(ValueError):
            block_starts(10, 0, 5, rng)
        with pytest.raises(ValueError):
            block_starts(10, 11, 5, rng)

    def test_deterministic_given_stream(self):
        a = block_starts(100, 5, 20, np.random.default_rng(3))
        b = block_starts(100, 5, 20, np.random.default_rng(3))
        assert np.array_equal(a, b)


def _brute_force_means(values, block_length, starts):
    """Reference resampler: materialize each resample and average it."""
    values = np.atleast_2d(np.asarray(values, dtype=float).T).T
    P = values.shape[0]
    out = []
    for row in starts:
        pieces = [values[s : s + block_length] for s in row]
        resample = np.concatenate(pieces)[:P]
        out.append(resample.mean(axis=0))
    return np.array(out)


class TestResampleMeans:
    @given(
        P=st.integers(3, 60),
        block_length=st.integers(1, 12),
        seed=st.integers(0, 10**6),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_1d(self, P, block_length, seed):
        block_length = min(block_length, P)
        rng = np.random.default_rng(seed)
        values = rng.normal(size=P)
        starts = block_starts(P, block_length, 8, rng)
        got = resample_means(values, block_length, starts)
        want = _brute_force_means(values, block_length, starts)[:, 0]
        assert np.allclose(got, want, atol=1e-12)

    def test_matches_brute_force_2d(self, rng):
        values = rng.normal(size=(37, 4))
        starts = block_starts(37, 5, 16, rng)
        got = resample_means(values, 5, starts)
        want = _brute_force_means(values, 5, starts)
        assert got.shape == (16, 4)
        assert np.allclose(got, want, atol=1e-12)

    def test_full_length_block_reproduces_sample_mean(self, rng):
        values = rng.normal(size=25)
        starts = block_starts(25, 25, 10, rng)
        means = resample_means(values, 25, starts)
        assert np.allclose(means, values.mean())

    def test_shared_starts_preserve_cross_column_structure(self, rng):
        """Identical columns resampled with shared starts stay identical."""
        col = rng.normal(size=50)
        values = np.column_stack([col, col])
        starts = block_starts(50, 4, 30, rng)
        means = resample_means(values, 4, starts)
        assert np.array_equal(means[:, 0], means[:, 1])
