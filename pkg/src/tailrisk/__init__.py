"""Strictly consistent scoring and comparison of VaR/ES forecasts.

Loss functions for quantile and joint (VaR, ES) forecasts, the
Diebold-Mariano equal-predictive-ability test, the Model Confidence Set
procedure, GARCH-family return simulation, closed-form oracles, and a
reproducible Monte Carlo experiment harness.
"""

from .distributions import (
    InnovationDistribution,
    StandardNormal,
    StandardizedStudentT,
)
from .scoring import (
    JointLossSpec,
    LossDifferential,
    LossSeries,
    QuantileLossSpec,
    differential,
    gpl_loss,
    joint_loss,
    loss_series,
)
from .dgp import (
    Constant,
    Garch11,
    ModelSpec,
    ReturnPath,
    RiskMetricsEwma,
    Tgarch11,
    calibrate_omega,
    filter_volatility,
    simulate_path,
    unconditional_variance,
)
from .forecasting import (
    ForecastSeries,
    dynamic_forecasts,
    misreported_forecast,
    static_forecast,
)
from .eqtest import (
    DmOutcome,
    IidSample,
    MovingBlockBootstrap,
    Outcome,
    classify,
    dm_test,
    statistic_distribution,
)
from .mcs import LossMatrix, McsConfig, McsResult, run_mcs
from .oracle import (
    RankingOracle,
    expected_static_loss,
    expected_tick_diff_static,
    prob_correct_sign,
    rank_models_simulated,
    rank_static_forecasts,
    variance_of_centered_differential,
)
from .harness import ExperimentConfig, MetricsTable, model_set, run_experiment

__all__ = [
    "InnovationDistribution",
    "StandardNormal",
    "StandardizedStudentT",
    "QuantileLossSpec",
    "JointLossSpec",
    "LossSeries",
    "LossDifferential",
    "gpl_loss",
    "joint_loss",
    "loss_series",
    "differential",
    "Constant",
    "Garch11",
    "Tgarch11",
    "RiskMetricsEwma",
    "ModelSpec",
    "ReturnPath",
    "unconditional_variance",
    "calibrate_omega",
    "simulate_path",
    "filter_volatility",
    "ForecastSeries",
    "dynamic_forecasts",
    "static_forecast",
    "misreported_forecast",
    "IidSample",
    "MovingBlockBootstrap",
    "DmOutcome",
    "Outcome",
    "dm_test",
    "classify",
    "statistic_distribution",
    "LossMatrix",
    "McsConfig",
    "McsResult",
    "run_mcs",
    "RankingOracle",
    "expected_tick_diff_static",
    "prob_correct_sign",
    "expected_static_loss",
    "variance_of_centered_differential",
    "rank_static_forecasts",
    "rank_models_simulated",
    "ExperimentConfig",
    "MetricsTable",
    "model_set",
    "run_experiment",
]
