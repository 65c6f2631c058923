"""One-day-ahead VaR and ES forecast series.

Dynamic forecasts scale the innovation quantile / tail expectation by the
model's filtered conditional volatility; static and misreported forecasts
are constant series used in the iid comparison scenarios. All forecasts
carry the left-tail sign convention (negative numbers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgp import ModelSpec
from .distributions import InnovationDistribution


@dataclass
class ForecastSeries:
    """VaR (and optionally ES) forecasts at level p for one model."""

    p: float
    var: np.ndarray
    es: np.ndarray | None = None
    model_label: str = ""

    def __post_init__(self) -> None:
        self.var = np.asarray(self.var, dtype=float)
        if self.es is not None:
            self.es = np.asarray(self.es, dtype=float)
            if len(self.es) != len(self.var):
                raise ValueError("VaR and ES series must have equal length")

    def __len__(self) -> int:
        return len(self.var)


def dynamic_forecasts(
    model: ModelSpec, sigma2: np.ndarray, p: float, with_es: bool = False
) -> ForecastSeries:
    """var_t = sqrt(sigma2_t) * q_p and es_t = sqrt(sigma2_t) * ES_p."""
    if not 0.0 < p < 0.5:
        raise ValueError(f"left-tail level must be in (0, 0.5), got {p}")
    sigma = np.sqrt(np.asarray(sigma2, dtype=float))
    var = sigma * model.dist.quantile(p)
    es = sigma * model.dist.expected_shortfall(p) if with_es else None
    return ForecastSeries(p, var, es, model.label)


def static_forecast(
    dist: InnovationDistribution, p: float, n: int, with_es: bool = False, label: str = ""
) -> ForecastSeries:
    """Constant forecast series at the distribution's own level-p functionals."""
    var = np.full(n, dist.quantile(p))
    es = np.full(n, dist.expected_shortfall(p)) if with_es else None
    return ForecastSeries(p, var, es, label or dist.label)


def misreported_forecast(
    dist: InnovationDistribution,
    p_star: float,
    n: int,
    with_es: bool = False,
    label: str = "",
) -> ForecastSeries:
    """Constant forecasts reported at the wrong quantile level p_star."""
    fc = static_forecast(dist, p_star, n, with_es=with_es)
    fc.model_label = label or f"{dist.label}@p*={p_star:g}"
    return fc


def export_forecasts_csv(forecasts: ForecastSeries, fh) -> None:
    fh.write("t,var,es,model_label,p\n")
    es = forecasts.es
    for t, v in enumerate(forecasts.var):
        es_field = "" if es is None else repr(float(es[t]))
        fh.write(f"{t},{float(v)!r},{es_field},{forecasts.model_label},{forecasts.p!r}\n")
