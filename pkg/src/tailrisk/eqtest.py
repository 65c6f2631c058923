"""Two-tailed Diebold-Mariano test of equal predictive ability.

The statistic is the studentized mean loss differential,
t = dbar / sqrt(varhat(dbar)), referred to standard-normal critical values.
The variance of dbar is estimated either from the iid sample variance or
by a moving-block bootstrap of the differential series.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy import stats

from .bootstrap import block_starts, default_block_length, resample_means
from .scoring import LossDifferential


class DegenerateDifferentialError(ValueError):
    """Raised when the loss differential has zero sample variance."""


@dataclass(frozen=True)
class IidSample:
    """varhat(dbar) = sample variance / P; appropriate for iid differentials."""


@dataclass(frozen=True)
class MovingBlockBootstrap:
    """varhat(dbar) from B moving-block resamples of the differential."""

    B: int = 1000
    block_length: int | None = None  # None: ceil(P^(1/3))

    def __post_init__(self) -> None:
        if self.B < 1:
            raise ValueError("resample count must be >= 1")


VarianceEstimator = Union[IidSample, MovingBlockBootstrap]


class Outcome(Enum):
    POWER = "power"
    TYPE_III = "type3"
    NO_REJECTION = "no_rejection"


@dataclass
class DmOutcome:
    statistic: float
    pvalue: float
    reject: bool
    dbar_sign: int
    alpha: float


def variance_of_mean(
    d: np.ndarray,
    est: VarianceEstimator,
    rng: np.random.Generator | None = None,
) -> float:
    """Estimate var(dbar) for a differential series."""
    d = np.asarray(d, dtype=float)
    P = len(d)
    if isinstance(est, IidSample):
        return float(np.var(d, ddof=1)) / P
    if rng is None:
        raise ValueError("the bootstrap estimator needs an explicit random stream")
    l = est.block_length if est.block_length is not None else default_block_length(P)
    starts = block_starts(P, l, est.B, rng)
    means = resample_means(d, l, starts)
    return float(np.mean((means - d.mean()) ** 2))


def dm_test(
    d: LossDifferential | np.ndarray,
    alpha: float = 0.05,
    est: VarianceEstimator = IidSample(),
    rng: np.random.Generator | None = None,
) -> DmOutcome:
    values = d.values if isinstance(d, LossDifferential) else np.asarray(d, dtype=float)
    if len(values) < 2:
        raise ValueError("need at least two loss differentials")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"test level must be in (0, 1), got {alpha}")
    # relative tolerance: differentials that agree to nine digits are constant
    # up to float cancellation (e.g. a tail-loss series with zero exceedances)
    if np.ptp(values) <= 1e-9 * max(np.max(np.abs(values)), 1e-300):
        raise DegenerateDifferentialError("all loss differentials are identical")
    dbar = float(values.mean())
    var_dbar = variance_of_mean(values, est, rng)
    if var_dbar <= 0.0:
        raise DegenerateDifferentialError("estimated variance of dbar is zero")
    stat = dbar / np.sqrt(var_dbar)
    pvalue = 2.0 * float(stats.norm.sf(abs(stat)))
    return DmOutcome(
        statistic=float(stat),
        pvalue=pvalue,
        reject=pvalue < alpha,
        dbar_sign=int(np.sign(dbar)),
        alpha=alpha,
    )


def classify(outcome: DmOutcome, true_mu_sign: int) -> Outcome:
    """Power / type III / no-rejection split of a DM outcome.

    A rejection with dbar exactly zero counts as type III (documented
    convention; it cannot reflect the true ranking).
    """
    if true_mu_sign not in (-1, 1):
        raise ValueError("true_mu_sign must be -1 or +1")
    if not outcome.reject:
        return Outcome.NO_REJECTION
    return Outcome.POWER if outcome.dbar_sign == true_mu_sign else Outcome.TYPE_III


@dataclass
class StatisticSummary:
    mean: float
    variance: float
    skewness: float
    fitted_df: float
    fitted_loc: float
    fitted_scale: float


def statistic_distribution(statistics: np.ndarray) -> StatisticSummary:
    """Moments plus an ML location-scale Student-t fit of replicated statistics."""
    statistics = np.asarray(statistics, dtype=float)
    if len(statistics) < 100:
        raise ValueError("need at least 100 replications to summarize")
    df, loc, scale = stats.t.fit(statistics)
    return StatisticSummary(
        mean=float(statistics.mean()),
        variance=float(statistics.var(ddof=1)),
        skewness=float(stats.skew(statistics)),
        fitted_df=float(df),
        fitted_loc=float(loc),
        fitted_scale=float(scale),
    )
