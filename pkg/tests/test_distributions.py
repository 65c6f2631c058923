"""Innovation distributions: quantiles, tail expectations, sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from tailrisk.distributions import (
    DegenerateIntervalError,
    StandardizedStudentT,
    StandardNormal,
)

P_GRID = (0.01, 0.025, 0.05, 0.1)


class TestQuantile:
    def test_standardized_t4_left_tail(self):
        # frozen from sqrt((nu-2)/nu) * t.ppf(0.01, 4)
        q = StandardizedStudentT(4).quantile(0.01)
        assert q == pytest.approx(-2.649491906790684, abs=1e-12)
        # one-day P&L on a USD 1m position implied by the log-return quantile
        assert 1e6 * (math.exp(q / 100.0) - 1.0) == pytest.approx(-26147, abs=1.0)

    def test_normal_left_tail(self):
        q = StandardNormal().quantile(0.01)
        assert q == pytest.approx(-2.3263478740408408, abs=1e-12)
        assert 1e6 * (math.exp(q / 100.0) - 1.0) == pytest.approx(-22995, abs=1.0)

    def test_normal_median_is_zero(self):
        assert StandardNormal().quantile(0.5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("p", (0.0, 1.0, -0.1, 1.5))
    def test_rejects_levels_outside_unit_interval(self, any_dist, p):
        with pytest.raises(ValueError):
            any_dist.quantile(p)

    @given(
        p1=st.floats(0.001, 0.998),
        gap=st.floats(0.0005, 0.001),
    )
    @settings(max_examples=50, deadline=None)
    def test_strictly_increasing(self, p1, gap):
        dist = StandardizedStudentT(4)
        assert dist.quantile(p1) < dist.quantile(p1 + gap)


class TestCdf:
    def test_normal_symmetry(self):
        assert StandardNormal().cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_inverse_identity(self, any_dist):
        for p in P_GRID:
            assert any_dist.cdf(any_dist.quantile(p)) == pytest.approx(p, abs=1e-10)

    def test_t3_value_matches_density_quadrature(self):
        # frozen from quadrature of the scaled-t density over (-inf, -2]
        assert StandardizedStudentT(3).cdf(-2.0) == pytest.approx(
            0.020259663176917, abs=1e-12
        )

    def test_roundtrip_z(self, any_dist):
        for z in (-3.0, -1.0, 0.25, 2.0):
            assert any_dist.quantile(any_dist.cdf(z)) == pytest.approx(z, abs=1e-9)


class TestExpectedShortfall:
    def test_normal_closed_form(self):
        assert StandardNormal().expected_shortfall(0.025) == pytest.approx(
            -2.337802792201413, abs=1e-12
        )

    def test_t7_matches_quantile_integral(self):
        # frozen from quadrature of (1/p) * int_0^p quantile(u) du
        assert StandardizedStudentT(7).expected_shortfall(0.01) == pytest.approx(
            -3.1861696633267322, abs=1e-9
        )

    def test_dominated_by_quantile(self, any_dist):
        for p in P_GRID + (0.25, 0.4):
            assert any_dist.expected_shortfall(p) < any_dist.quantile(p)

    def test_equals_conditional_tail_mean(self, any_dist):
        for p in P_GRID:
            q = any_dist.quantile(p)
            tail, _ = integrate.quad(
                lambda z: z * any_dist.pdf(z), -np.inf, q, epsabs=1e-12
            )
            assert any_dist.expected_shortfall(p) == pytest.approx(tail / p, abs=1e-8)

    def test_rejects_bad_level(self, any_dist):
        with pytest.raises(ValueError):
            any_dist.expected_shortfall(0.0)


class TestMoments:
    def test_unit_variance_by_quadrature(self, any_dist):
        var, _ = integrate.quad(
            lambda z: z * z * any_dist.pdf(z), -np.inf, np.inf, epsabs=1e-10, limit=200
        )
        assert var == pytest.approx(1.0, abs=1e-8)

    def test_zero_mean_by_quadrature(self, any_dist):
        mean, _ = integrate.quad(
            lambda z: z * any_dist.pdf(z), -np.inf, np.inf, epsabs=1e-10, limit=200
        )
        assert mean == pytest.approx(0.0, abs=1e-8)

    def test_partial_moment_matches_quadrature(self, any_dist):
        for z in (-2.5, -1.0, 0.5):
            direct, _ = integrate.quad(
                lambda y: y * any_dist.pdf(y), -np.inf, z, epsabs=1e-12
            )
            assert any_dist.partial_moment(z) == pytest.approx(direct, abs=1e-9)

    def test_requires_more_than_two_degrees(self):
        with pytest.raises(ValueError):
            StandardizedStudentT(2.0)


class TestTruncatedMean:
    def test_symmetric_interval_is_zero(self):
        assert StandardNormal().truncated_mean(-1.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_normal_tail_interval(self):
        # frozen from quadrature of z*phi(z) over [-2.3263, -2.0537)
        assert StandardNormal().truncated_mean(-2.3263, -2.0537) == pytest.approx(
            -2.1765511676598566, abs=1e-10
        )

    def test_lies_inside_interval(self, any_dist):
        a, b = -2.2, -1.1
        assert a < any_dist.truncated_mean(a, b) < b

    def test_shrinking_interval_approaches_endpoint(self):
        dist = StandardizedStudentT(4)
        a = dist.quantile(0.05)
        assert dist.truncated_mean(a, a + 1e-6) == pytest.approx(a, abs=1e-5)

    def test_rejects_reversed_interval(self, any_dist):
        with pytest.raises(ValueError):
            any_dist.truncated_mean(1.0, -1.0)

    def test_rejects_massless_interval(self):
        with pytest.raises(DegenerateIntervalError):
            StandardNormal().truncated_mean(10.0, 11.0)


class TestSampling:
    def test_same_seed_bit_identical(self, any_dist):
        a = any_dist.sample(1000, np.random.default_rng(7))
        b = any_dist.sample(1000, np.random.default_rng(7))
        assert np.array_equal(a, b)

    def test_mean_near_zero(self, rng):
        z = StandardNormal().sample(10**6, rng)
        assert abs(z.mean()) < 4.0 / math.sqrt(10**6)

    def test_t3_variance_near_one(self, rng):
        # heavy tails: wide Monte Carlo band
        z = StandardizedStudentT(3).sample(10**6, rng)
        assert z.var() == pytest.approx(1.0, abs=0.15)

    def test_t4_variance_near_one(self, rng):
        z = StandardizedStudentT(4).sample(10**6, rng)
        assert z.var() == pytest.approx(1.0, abs=0.05)

    def test_rejects_empty_sample(self, any_dist, rng):
        with pytest.raises(ValueError):
            any_dist.sample(0, rng)

    def test_prefix_stability(self, any_dist):
        """Drawing n1 < n2 variates yields a prefix of the longer draw.

        Nested evaluation windows in the experiment harness rely on this.
        """
        short = any_dist.sample(100, np.random.default_rng(11))
        long = any_dist.sample(2500, np.random.default_rng(11))
        assert np.array_equal(short, long[:100])


def test_labels():
    assert StandardNormal().label == "normal"
    assert StandardizedStudentT(4).label == "t4"
    assert StandardizedStudentT(4.5).label == "t4.5"


def test_cdf_agrees_with_scipy_scaled_t():
    dist = StandardizedStudentT(7)
    scale = math.sqrt(5.0 / 7.0)
    for z in (-2.0, 0.3, 1.7):
        assert dist.cdf(z) == pytest.approx(stats.t.cdf(z / scale, 7), abs=1e-14)
