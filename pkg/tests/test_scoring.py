"""Quantile (GPL) and joint VaR/ES losses, loss series and differentials."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailrisk.distributions import StandardizedStudentT, StandardNormal
from tailrisk.forecasting import ForecastSeries, static_forecast
from tailrisk.scoring import (
    JointLossSpec,
    LossSeries,
    LossSpecMismatchError,
    QuantileLossSpec,
    differential,
    export_losses_csv,
    gpl_loss,
    joint_loss,
    loss_series,
)


class TestSpecs:
    @pytest.mark.parametrize("p", (0.0, 1.0, -0.2))
    def test_quantile_spec_rejects_bad_level(self, p):
        with pytest.raises(ValueError):
            QuantileLossSpec(p=p)

    def test_quantile_spec_rejects_bad_degree(self):
        with pytest.raises(ValueError):
            QuantileLossSpec(p=0.05, b=0.0)

    def test_joint_spec_normalizes_case(self):
        assert JointLossSpec(p=0.05, parametrization="al").parametrization == "AL"

    def test_joint_spec_rejects_unknown_parametrization(self):
        with pytest.raises(ValueError):
            JointLossSpec(p=0.05, parametrization="xyz")

    def test_requires_es_flags(self):
        assert not QuantileLossSpec(p=0.05).requires_es
        assert JointLossSpec(p=0.05).requires_es


class TestGplLoss:
    def test_tick_loss_exceedance(self):
        # (1{y<=x} - p)(x - y) at p=0.05, x=-2.6, y=-3.0
        spec = QuantileLossSpec(p=0.05, b=1.0)
        assert gpl_loss(spec, -2.6, -3.0) == pytest.approx(0.38, abs=1e-12)

    def test_zero_at_coincidence(self):
        spec = QuantileLossSpec(p=0.1, b=1.0)
        assert gpl_loss(spec, -1.7, -1.7) == 0.0

    def test_quadratic_degree(self):
        spec = QuantileLossSpec(p=0.05, b=2.0)
        assert gpl_loss(spec, -2.0, -3.0) == pytest.approx(2.375, abs=1e-12)

    def test_vectorized(self):
        spec = QuantileLossSpec(p=0.05, b=1.0)
        out = gpl_loss(spec, np.array([-2.6, -2.6]), np.array([-3.0, -1.0]))
        assert out.shape == (2,)
        assert out[0] == pytest.approx(0.38)
        assert out[1] == pytest.approx(-0.05 * (-2.6 + 1.0))

    @given(
        c=st.floats(0.01, 50.0),
        x=st.floats(-5.0, -0.1),
        y=st.floats(-5.0, 5.0),
        b=st.sampled_from([0.5, 1.0, 2.0]),
    )
    @settings(max_examples=100, deadline=None)
    def test_positive_homogeneity(self, c, x, y, b):
        spec = QuantileLossSpec(p=0.05, b=b)
        scaled = gpl_loss(spec, c * x, c * y)
        assert scaled == pytest.approx(c**b * gpl_loss(spec, x, y), rel=1e-9, abs=1e-12)

    def test_sign_decomposition_threshold(self, rng):
        """d = L(x1,y) - L(x2,y) is negative exactly when y <= x2 - p(x2-x1)."""
        p, x1, x2 = 0.05, -2.5, -1.8
        spec = QuantileLossSpec(p=p, b=1.0)
        y = StandardizedStudentT(4).sample(200_000, rng)
        d = gpl_loss(spec, x1, y) - gpl_loss(spec, x2, y)
        threshold = x2 - p * (x2 - x1)
        assert np.array_equal(d < 0, y <= threshold)
        # frequency of the favorable sign matches the cdf at the threshold
        freq = float(np.mean(d < 0))
        expected = StandardizedStudentT(4).cdf(threshold)
        assert freq == pytest.approx(expected, abs=4.0 * math.sqrt(expected / 200_000))


class TestJointLoss:
    def test_al_example(self):
        spec = JointLossSpec(p=0.025, parametrization="AL")
        got = joint_loss(spec, -2.5, -3.2, -1.0)
        assert got == pytest.approx(1.9697186177899708, abs=1e-12)

    def test_fzg_all_arguments_equal(self):
        # reduces to -p*y - log(1 + e^y) for x1 = x2 = y < 0
        spec = JointLossSpec(p=0.025, parametrization="FZG")
        assert joint_loss(spec, -1.0, -1.0, -1.0) == pytest.approx(
            -0.28826168751822284, abs=1e-12
        )

    def test_nz_no_exceedance_reduction(self):
        # y > x1: loss = 0.5(-x2)^(-1/2)(x2 - x1) + sqrt(-x2)
        spec = JointLossSpec(p=0.05, parametrization="NZ")
        got = joint_loss(spec, -2.0, -2.5, 0.3)
        assert got == pytest.approx(1.4230249470757708, abs=1e-12)

    @pytest.mark.parametrize("name", ("AL", "NZ"))
    def test_negative_es_required(self, name):
        spec = JointLossSpec(p=0.05, parametrization=name)
        with pytest.raises(ValueError, match=name):
            joint_loss(spec, -1.0, 0.5, -2.0)

    def test_fzg_accepts_positive_es_argument(self):
        spec = JointLossSpec(p=0.05, parametrization="FZG")
        assert np.isfinite(joint_loss(spec, -1.0, 0.5, -2.0))

    def test_vectorized(self):
        spec = JointLossSpec(p=0.025, parametrization="AL")
        out = joint_loss(
            spec, np.array([-2.5, -2.5]), np.array([-3.2, -3.2]), np.array([-1.0, -3.0])
        )
        assert out.shape == (2,)
        assert out[0] == pytest.approx(1.9697186177899708)


class TestLossSeries:
    def test_constant_inputs_constant_losses(self):
        spec = QuantileLossSpec(p=0.05)
        fc = ForecastSeries(0.05, np.full(4, -2.0))
        series = loss_series(spec, fc, np.full(4, -1.0))
        assert np.ptp(series.values) == 0.0
        assert len(series) == 4

    def test_single_period_mean(self):
        spec = QuantileLossSpec(p=0.05)
        fc = ForecastSeries(0.05, np.array([-2.6]))
        series = loss_series(spec, fc, np.array([-3.0]))
        assert series.mean == pytest.approx(0.38)

    def test_length_mismatch(self):
        spec = QuantileLossSpec(p=0.05)
        fc = ForecastSeries(0.05, np.full(4, -2.0))
        with pytest.raises(ValueError, match="length"):
            loss_series(spec, fc, np.zeros(5))

    def test_joint_requires_es(self):
        spec = JointLossSpec(p=0.05)
        fc = ForecastSeries(0.05, np.full(4, -2.0))
        with pytest.raises(ValueError, match="ES"):
            loss_series(spec, fc, np.zeros(4))

    def test_true_quantile_beats_wrong_distribution_on_average(self, rng):
        """Strict consistency in the long run: the true quantile wins."""
        truth = StandardizedStudentT(4)
        y = truth.sample(10**6, rng)
        spec = QuantileLossSpec(p=0.1)
        l_true = loss_series(spec, static_forecast(truth, 0.1, len(y)), y)
        l_norm = loss_series(spec, static_forecast(StandardNormal(), 0.1, len(y)), y)
        assert l_true.mean < l_norm.mean


class TestDifferential:
    def _series(self, values, label, p=0.05):
        return LossSeries(np.asarray(values, dtype=float), QuantileLossSpec(p=p), label)

    def test_self_differential_is_zero(self):
        a = self._series([1.0, 2.0, 3.0], "a")
        assert np.all(differential(a, a).values == 0.0)

    def test_antisymmetry(self):
        a = self._series([1.0, 2.0], "a")
        b = self._series([0.5, 2.5], "b")
        assert np.array_equal(differential(a, b).values, -differential(b, a).values)
        assert differential(a, b).labels == ("a", "b")

    def test_spec_mismatch(self):
        a = self._series([1.0, 2.0], "a", p=0.05)
        b = self._series([1.0, 2.0], "b", p=0.1)
        with pytest.raises(LossSpecMismatchError):
            differential(a, b)

    def test_length_mismatch(self):
        a = self._series([1.0, 2.0], "a")
        b = self._series([1.0, 2.0, 3.0], "b")
        with pytest.raises(ValueError):
            differential(a, b)


def test_export_losses_csv(tmp_path):
    series = LossSeries(np.array([0.5, 1.25]), QuantileLossSpec(p=0.05), "m1")
    out = tmp_path / "losses.csv"
    with open(out, "w") as fh:
        export_losses_csv([series], fh)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,model_label,loss"
    assert lines[1] == "0,m1,0.5"
    assert lines[2] == "1,m1,1.25"
