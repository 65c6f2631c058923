"""Model Confidence Set: sequential equivalence tests with an elimination rule.

Each step bootstraps the loss matrix by rows (one block-index sequence
shared across models, preserving cross-model correlation), studentizes
the excess-loss means, and compares the sample statistic (T_max or T_R)
against its recentered bootstrap distribution. Rejections eliminate the
model with the largest standardized excess loss; reported MCS p-values
are running maxima of the step p-values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import block_starts, default_block_length, resample_means
from .scoring import LossSeries


class DegenerateLossError(ValueError):
    """Raised when a loss differential needed for studentization has zero variance."""


@dataclass
class LossMatrix:
    """P x m matrix of per-period losses for m competing models."""

    values: np.ndarray
    labels: list[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("loss matrix must be two-dimensional")
        if self.values.shape[1] != len(self.labels):
            raise ValueError("one label per model column required")
        if self.values.shape[1] < 2:
            raise ValueError("need at least two models")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("model labels must be unique")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("loss matrix contains non-finite entries")

    @property
    def P(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_series(cls, series: list[LossSeries]) -> "LossMatrix":
        return cls(np.column_stack([s.values for s in series]), [s.model_label for s in series])


@dataclass(frozen=True)
class McsConfig:
    alpha: float = 0.25
    statistic: str = "tmax"  # "tmax" or "tr"
    B: int = 5000
    block_length: int | None = None  # None: ceil(P^(1/3))

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"test level must be in (0, 1), got {self.alpha}")
        if self.statistic not in ("tmax", "tr"):
            raise ValueError(f"statistic must be 'tmax' or 'tr', got {self.statistic!r}")
        if self.B < 1:
            raise ValueError("bootstrap resample count must be >= 1")


@dataclass
class EliminationRecord:
    label: str
    step_pvalue: float
    mcs_pvalue: float


@dataclass
class McsResult:
    surviving: list[str]
    eliminated: list[EliminationRecord]
    per_model_pvalue: dict[str, float]

    @property
    def set_size(self) -> int:
        return len(self.surviving)


def relative_performance(losses: LossMatrix, mode: str = "centered"):
    """Loss differentials: pairwise d_{t,ij} for i < j, or centered d_{t,i.}."""
    if mode == "centered":
        return losses.values - losses.values.mean(axis=1, keepdims=True)
    if mode == "pairwise":
        out = {}
        for i in range(losses.m):
            for j in range(i + 1, losses.m):
                out[(losses.labels[i], losses.labels[j])] = (
                    losses.values[:, i] - losses.values[:, j]
                )
        return out
    raise ValueError(f"mode must be 'centered' or 'pairwise', got {mode!r}")


def _tmax_step(colmeans, boot_colmeans, labels):
    """Sample/bootstrap T_max statistics plus per-model t values."""
    dbar = colmeans - colmeans.mean()
    boot_dbar = boot_colmeans - boot_colmeans.mean(axis=1, keepdims=True)
    varhat = np.mean((boot_dbar - dbar) ** 2, axis=0)
    # a variance at rounding-noise scale relative to the excess losses means
    # the differential is constant up to float cancellation: no evidence
    tol = (1e-9 * max(float(np.max(np.abs(dbar))), 1e-300)) ** 2
    if np.any(varhat <= tol):
        bad = labels[int(np.argmin(varhat))]
        raise DegenerateLossError(f"zero bootstrap variance for model {bad!r}")
    scale = np.sqrt(varhat)
    t_values = dbar / scale
    t_stat = float(np.max(t_values))
    boot_stats = np.max((boot_dbar - dbar) / scale, axis=1)
    return t_stat, boot_stats, t_values


def _tr_step(colmeans, boot_colmeans, labels):
    """Sample/bootstrap T_R statistics plus per-model sup_j t_{ij} values."""
    dbar = colmeans[:, None] - colmeans[None, :]
    boot_dbar = boot_colmeans[:, :, None] - boot_colmeans[:, None, :]
    varhat = np.mean((boot_dbar - dbar) ** 2, axis=0)
    m = len(colmeans)
    off = ~np.eye(m, dtype=bool)
    tol = (1e-9 * max(float(np.max(np.abs(dbar))), 1e-300)) ** 2
    if np.any(varhat[off] <= tol):
        i, j = np.argwhere((varhat <= tol) & off)[0]
        raise DegenerateLossError(
            f"zero bootstrap variance for pair ({labels[i]!r}, {labels[j]!r})"
        )
    # unit scale on the diagonal keeps the division clean; those entries are zero
    scale = np.sqrt(np.where(off, varhat, 1.0))
    t_matrix = dbar / scale
    t_stat = float(np.max(np.abs(t_matrix)))
    boot_stats = np.max(np.abs((boot_dbar - dbar) / scale), axis=(1, 2))
    t_values = np.max(np.where(off, t_matrix, -np.inf), axis=1)
    return t_stat, boot_stats, t_values


def mcs_statistic(losses: LossMatrix, varhat: np.ndarray, which: str = "tmax"):
    """Studentized statistics from given variance estimates (diagnostic helper).

    For 'tmax', ``varhat`` holds var(dbar_{i.}) per model; for 'tr' it is the
    m x m matrix of var(dbar_{ij}).
    """
    varhat = np.asarray(varhat, dtype=float)
    colmeans = losses.values.mean(axis=0)
    if which == "tmax":
        if np.any(varhat <= 0.0):
            bad = losses.labels[int(np.argmin(varhat))]
            raise DegenerateLossError(f"zero variance for model {bad!r}")
        t_values = (colmeans - colmeans.mean()) / np.sqrt(varhat)
        return float(np.max(t_values)), t_values
    if which == "tr":
        off = ~np.eye(losses.m, dtype=bool)
        if np.any(varhat[off] <= 0.0):
            i, j = np.argwhere((varhat <= 0.0) & off)[0]
            raise DegenerateLossError(
                f"zero variance for pair ({losses.labels[i]!r}, {losses.labels[j]!r})"
            )
        dbar = colmeans[:, None] - colmeans[None, :]
        t_matrix = dbar / np.sqrt(np.where(off, varhat, 1.0))
        stat = float(np.max(np.abs(t_matrix[off])))
        return stat, np.max(np.where(off, t_matrix, -np.inf), axis=1)
    raise ValueError(f"statistic must be 'tmax' or 'tr', got {which!r}")


def run_mcs(losses: LossMatrix, config: McsConfig, rng: np.random.Generator) -> McsResult:
    """Sequential MCS procedure returning survivors and monotonized p-values."""
    P = losses.P
    l = config.block_length if config.block_length is not None else default_block_length(P)
    if P < l:
        raise ValueError(f"out-of-sample size {P} is smaller than block length {l}")

    active = list(range(losses.m))
    eliminated: list[EliminationRecord] = []
    running_max = 0.0
    survivors_pvalue = 1.0
    step_fn = _tmax_step if config.statistic == "tmax" else _tr_step

    while len(active) > 1:
        sub = losses.values[:, active]
        if np.all(sub == sub[:, :1]):
            # all remaining models share identical losses: nothing to test
            survivors_pvalue = max(running_max, 1.0)
            break
        labels = [losses.labels[i] for i in active]
        starts = block_starts(P, l, config.B, rng)
        boot_colmeans = resample_means(sub, l, starts)
        colmeans = sub.mean(axis=0)
        t_stat, boot_stats, t_values = step_fn(colmeans, boot_colmeans, labels)
        step_pvalue = float(np.mean(boot_stats >= t_stat))
        running_max = max(running_max, step_pvalue)
        if step_pvalue >= config.alpha:
            survivors_pvalue = running_max
            break
        worst = int(np.argmax(t_values))  # ties resolve to the lowest column index
        eliminated.append(
            EliminationRecord(labels[worst], step_pvalue, running_max)
        )
        active.pop(worst)
    else:
        survivors_pvalue = max(running_max, 1.0)

    surviving = [losses.labels[i] for i in active]
    per_model = {rec.label: rec.mcs_pvalue for rec in eliminated}
    per_model.update({label: survivors_pvalue for label in surviving})
    return McsResult(surviving, eliminated, per_model)


def export_mcs_csv(result: McsResult, fh) -> None:
    fh.write("model_label,eliminated_step,step_pvalue,mcs_pvalue,survived\n")
    for step, rec in enumerate(result.eliminated, start=1):
        fh.write(f"{rec.label},{step},{rec.step_pvalue!r},{rec.mcs_pvalue!r},0\n")
    for label in result.surviving:
        fh.write(f"{label},,,{result.per_model_pvalue[label]!r},1\n")
