"""Strictly consistent loss functions for quantile and joint VaR/ES forecasts.

The quantile family is the homogeneous generalized piecewise linear (GPL)
class with degree b > 0; b = 1 is the familiar tick loss. The joint family
evaluates a (VaR, ES) pair through a generic skeleton parametrized by the
function quadruple (G1, G2, curly_G2, a); the AL, NZ and FZG variants are
rows of a table of such quadruples, not separate code paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .forecasting import ForecastSeries

ArrayLike = Union[float, np.ndarray]


class LossSpecMismatchError(ValueError):
    """Raised when loss series built from different specs are combined."""


@dataclass(frozen=True)
class QuantileLossSpec:
    """Homogeneous GPL loss at level p with homogeneity degree b."""

    p: float
    b: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {self.p}")
        if not self.b > 0.0:
            raise ValueError(f"homogeneity degree must be positive, got {self.b}")

    @property
    def requires_es(self) -> bool:
        return False

    def describe(self) -> str:
        return f"gpl(p={self.p:g}, b={self.b:g})"


@dataclass(frozen=True)
class JointLossSpec:
    """Joint VaR/ES loss at level p; parametrization is one of AL, NZ, FZG."""

    p: float
    parametrization: str = "FZG"

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"quantile level must be in (0, 1), got {self.p}")
        if self.parametrization.upper() not in _JOINT_TABLE:
            raise ValueError(f"unknown parametrization {self.parametrization!r}")
        object.__setattr__(self, "parametrization", self.parametrization.upper())

    @property
    def requires_es(self) -> bool:
        return True

    def describe(self) -> str:
        return f"{self.parametrization.lower()}(p={self.p:g})"


LossSpec = Union[QuantileLossSpec, JointLossSpec]


def _signed_power(v: ArrayLike, b: float) -> ArrayLike:
    # sgn(v) |v|^b, with sgn(0) = 0 so the map is continuous at zero
    return np.sign(v) * np.abs(v) ** b


def gpl_loss(spec: QuantileLossSpec, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Homogeneous GPL loss (1{y <= x} - p)(sgn(x)|x|^b - sgn(y)|y|^b)/b."""
    indicator = (np.asarray(y) <= np.asarray(x)).astype(float)
    out = (indicator - spec.p) * (_signed_power(x, spec.b) - _signed_power(y, spec.b)) / spec.b
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


@dataclass(frozen=True)
class _JointQuadruple:
    """One row of the joint-loss parametrization table.

    ``a`` may depend on the quantile level, hence it takes (y, p).
    """

    g1: Callable[[ArrayLike], ArrayLike]
    g2: Callable[[ArrayLike], ArrayLike]
    curly_g2: Callable[[ArrayLike], ArrayLike]
    a: Callable[[ArrayLike, float], ArrayLike]


_JOINT_TABLE: dict[str, _JointQuadruple] = {
    "AL": _JointQuadruple(
        g1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        g2=lambda x: -1.0 / x,
        curly_g2=lambda x: -np.log(-x),
        a=lambda y, p: np.full_like(np.asarray(y, dtype=float), 1.0 - np.log1p(-p)),
    ),
    "NZ": _JointQuadruple(
        g1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        g2=lambda x: 0.5 / np.sqrt(-x),
        curly_g2=lambda x: -np.sqrt(-x),
        a=lambda y, p: np.zeros_like(np.asarray(y, dtype=float)),
    ),
    "FZG": _JointQuadruple(
        g1=lambda x: np.asarray(x, dtype=float),
        g2=lambda x: 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float))),
        curly_g2=lambda x: np.logaddexp(0.0, np.asarray(x, dtype=float)),
        a=lambda y, p: np.zeros_like(np.asarray(y, dtype=float)),
    ),
}
# AL and NZ require a strictly negative ES argument
_NEGATIVE_ES_PARAMS = frozenset({"AL", "NZ"})


def joint_loss(spec: JointLossSpec, x1: ArrayLike, x2: ArrayLike, y: ArrayLike) -> ArrayLike:
    """Joint VaR/ES loss evaluated from the (G1, G2, curly_G2, a) quadruple."""
    row = _JOINT_TABLE[spec.parametrization]
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.parametrization in _NEGATIVE_ES_PARAMS and np.any(x2 >= 0.0):
        raise ValueError(
            f"{spec.parametrization} loss requires a negative ES forecast, "
            f"got max x2 = {np.max(x2)}"
        )
    hit = (y <= x1).astype(float)
    p = spec.p
    out = (
        (hit - p) * row.g1(x1)
        - hit * row.g1(y)
        + row.g2(x2) * (x2 - x1 + hit * (x1 - y) / p)
        - row.curly_g2(x2)
        + row.a(y, p)
    )
    return out if out.ndim else float(out)


@dataclass
class LossSeries:
    """Per-period losses for one model under one loss spec."""

    values: np.ndarray
    spec: LossSpec
    model_label: str = ""

    def __len__(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass
class LossDifferential:
    """d_t = loss_i(t) - loss_j(t) for a pair of models."""

    values: np.ndarray
    labels: tuple[str, str] = ("", "")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def loss_series(spec: LossSpec, forecasts: ForecastSeries, realizations: np.ndarray) -> LossSeries:
    """Elementwise losses of a forecast series against realizations."""
    realizations = np.asarray(realizations, dtype=float)
    if len(forecasts.var) != len(realizations):
        raise ValueError(
            f"length mismatch: {len(forecasts.var)} forecasts vs "
            f"{len(realizations)} realizations"
        )
    if isinstance(spec, JointLossSpec):
        if forecasts.es is None:
            raise ValueError("joint loss requires an ES forecast series")
        values = joint_loss(spec, forecasts.var, forecasts.es, realizations)
    else:
        values = gpl_loss(spec, forecasts.var, realizations)
    return LossSeries(np.asarray(values, dtype=float), spec, forecasts.model_label)


def differential(a: LossSeries, b: LossSeries) -> LossDifferential:
    if a.spec != b.spec:
        raise LossSpecMismatchError(f"specs differ: {a.spec} vs {b.spec}")
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    return LossDifferential(a.values - b.values, (a.model_label, b.model_label))


def export_losses_csv(series: list[LossSeries], fh) -> None:
    """Long-format loss export: one row per (t, model)."""
    fh.write("t,model_label,loss\n")
    for s in series:
        for t, v in enumerate(s.values):
            fh.write(f"{t},{s.model_label},{float(v)!r}\n")
