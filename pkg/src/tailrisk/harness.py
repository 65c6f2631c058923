"""Monte Carlo experiment runner.

Wires DGPs, forecasts, losses, the DM test and the MCS procedure into the
scenario grid (static/dynamic pairwise comparisons and m=5 / m=10 model
confidence sets) and aggregates power, type III error, potency, set sizes,
individual rejection frequencies and sign frequencies into CSV-ready tables.

Reproducibility contract: every replication derives its random streams from
(master_seed, replication index) and every (p, P) evaluation cell derives
its bootstrap stream from (master_seed, replication index, cell key), so
results are bit-identical for a given config and seed regardless of the
worker count or of which other cells share the run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import eqtest, oracle, scoring
from .bootstrap import default_block_length
from .dgp import (
    Constant,
    Garch11,
    ModelSpec,
    RiskMetricsEwma,
    Tgarch11,
    filter_volatility,
    simulate_path,
)
from .distributions import StandardNormal, StandardizedStudentT
from .eqtest import IidSample, MovingBlockBootstrap, dm_test
from .forecasting import dynamic_forecasts, misreported_forecast, static_forecast
from .mcs import LossMatrix, McsConfig, run_mcs
from .scoring import JointLossSpec, LossSpec, QuantileLossSpec

# DGP parameters used throughout the dynamic scenarios
DGP_OMEGA = 0.03
DGP_ALPHA = 0.04
DGP_GAMMA = 0.1
DGP_BETA = 0.9
DGP_SIGMA2 = DGP_OMEGA / (1.0 - DGP_ALPHA - 0.5 * DGP_GAMMA - DGP_BETA)
RISKMETRICS_LAMBDA = 0.94

PAIRWISE_SCENARIOS = (
    "static_distributional",
    "static_wrong_quantile",
    "dynamic_distributional",
    "dynamic_volatility",
)
MCS_SCENARIOS = ("mcs_m5", "mcs_m10")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    p_levels: tuple[float, ...] = (0.01, 0.025, 0.05, 0.1)
    P_sizes: tuple[int, ...] = (251, 500, 1000, 2500)
    nu: float = 4.0
    loss: str = "gpl"  # gpl | al | nz | fzg
    b: float = 1.0
    alpha: float = 0.05
    replications: int = 1000
    B: int = 0  # bootstrap resamples; 0 means iid variance for the DM test
    block_length: int | None = None  # None: scenario default
    p_star: tuple[float, ...] = ()
    statistic: str = "tmax"
    burn_in: int = 2000
    collect_statistics: bool = False
    oracle_n: int = 10_000_000

    def __post_init__(self) -> None:
        if self.scenario not in PAIRWISE_SCENARIOS + MCS_SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if not self.p_levels or not self.P_sizes:
            raise ValueError("p_levels and P_sizes must be nonempty")
        if self.scenario == "static_wrong_quantile" and not self.p_star:
            raise ValueError("static_wrong_quantile requires a p_star list")
        if self.scenario in MCS_SCENARIOS:
            if self.nu not in (3.0, 7.0, 12.0, 3, 7, 12):
                raise ValueError("MCS scenarios use nu in {3, 7, 12}")
            if self.B < 1:
                raise ValueError("MCS scenarios require bootstrap resamples (B >= 1)")
        if self.loss not in ("gpl", "al", "nz", "fzg"):
            raise ValueError(f"unknown loss family {self.loss!r}")

    def loss_spec(self, p: float) -> LossSpec:
        if self.loss == "gpl":
            return QuantileLossSpec(p=p, b=self.b)
        return JointLossSpec(p=p, parametrization=self.loss)

    @property
    def loss_param(self) -> str:
        return f"{self.b:g}" if self.loss == "gpl" else self.loss

    @property
    def is_static(self) -> bool:
        return self.scenario.startswith("static")


def true_model_spec(nu: float, label: str | None = None) -> ModelSpec:
    vol = Tgarch11(DGP_OMEGA, DGP_ALPHA, DGP_GAMMA, DGP_BETA)
    return ModelSpec(vol, StandardizedStudentT(nu), label or f"tgarch-t{nu:g}")


def model_set(kind: str, nu: float) -> list[ModelSpec]:
    """The m=5 and m=10 competing model sets, all on unconditional variance 3."""
    if kind not in ("M5", "M10"):
        raise ValueError(f"kind must be 'M5' or 'M10', got {kind!r}")
    if nu not in (3, 7, 12, 3.0, 7.0, 12.0):
        raise ValueError("model sets are defined for nu in {3, 7, 12}")
    tgarch = Tgarch11(DGP_OMEGA, DGP_ALPHA, DGP_GAMMA, DGP_BETA)
    garch = Garch11(DGP_SIGMA2 * (1.0 - DGP_ALPHA - DGP_BETA), DGP_ALPHA, DGP_BETA)
    t_nu = StandardizedStudentT(nu)
    normal = StandardNormal()
    models = [
        ModelSpec(tgarch, t_nu, f"tgarch-t{nu:g}"),
        ModelSpec(tgarch, normal, "tgarch-n"),
        ModelSpec(garch, t_nu, f"garch-t{nu:g}"),
        ModelSpec(garch, normal, "garch-n"),
        ModelSpec(Constant(DGP_SIGMA2), t_nu, f"const-t{nu:g}"),
    ]
    if kind == "M10":
        for nu_alt in (3, 7, 12):
            models.append(
                ModelSpec(
                    RiskMetricsEwma(RISKMETRICS_LAMBDA),
                    StandardizedStudentT(nu_alt),
                    f"rm-t{nu_alt:g}",
                )
            )
        for nu_alt in (3, 7, 12):
            if float(nu_alt) == float(nu):
                continue
            models.append(
                ModelSpec(garch, StandardizedStudentT(nu_alt), f"garch-t{nu_alt:g}")
            )
    return models


# ---------------------------------------------------------------------------
# seed derivation


def _cell_key(p: float, p_star: float | None, P: int) -> tuple[int, int, int]:
    return (int(round(p * 10_000)), int(round((p_star or 0.0) * 10_000)), P)


def _rep_stream(master_seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(rep,)))


def _cell_stream(
    master_seed: int, rep: int, p: float, p_star: float | None, P: int
) -> np.random.Generator:
    key = (rep,) + _cell_key(p, p_star, P)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


# ---------------------------------------------------------------------------
# pairwise scenarios


def _pairwise_cells(config: ExperimentConfig) -> list[tuple[float, float | None, int]]:
    stars: tuple[float | None, ...] = (None,)
    if config.scenario == "static_wrong_quantile":
        stars = config.p_star
    return [(p, ps, P) for p in config.p_levels for ps in stars for P in config.P_sizes]


def _pairwise_differentials(
    config: ExperimentConfig, rep: int, master_seed: int
) -> dict[tuple[float, float | None], np.ndarray]:
    """Full-length loss differentials d_t = l_true(t) - l_competitor(t) per comparison."""
    rng = _rep_stream(master_seed, rep)
    max_P = max(config.P_sizes)
    with_es = config.loss != "gpl"
    out: dict[tuple[float, float | None], np.ndarray] = {}

    if config.is_static:
        dist = StandardizedStudentT(config.nu)
        y = dist.sample(max_P, rng)
        for p in config.p_levels:
            spec = config.loss_spec(p)
            fc_true = static_forecast(dist, p, max_P, with_es=with_es, label="true")
            l_true = scoring.loss_series(spec, fc_true, y).values
            if config.scenario == "static_distributional":
                fc_alt = static_forecast(StandardNormal(), p, max_P, with_es=with_es)
                out[(p, None)] = l_true - scoring.loss_series(spec, fc_alt, y).values
            else:
                for ps in config.p_star:
                    # the misreported forecast is still scored at the true level
                    fc_alt = misreported_forecast(dist, ps, max_P, with_es=with_es)
                    out[(p, ps)] = l_true - scoring.loss_series(spec, fc_alt, y).values
        return out

    true_spec = true_model_spec(config.nu)
    if config.scenario == "dynamic_distributional":
        competitor = ModelSpec(true_spec.vol, StandardNormal(), "tgarch-n")
    else:
        garch = Garch11(DGP_SIGMA2 * (1.0 - DGP_ALPHA - DGP_BETA), DGP_ALPHA, DGP_BETA)
        competitor = ModelSpec(garch, true_spec.dist, f"garch-t{config.nu:g}")
    path = simulate_path(true_spec, max_P, rng, burn_in=config.burn_in)
    sigma2_true = filter_volatility(true_spec, path)
    sigma2_alt = filter_volatility(competitor, path)
    for p in config.p_levels:
        spec = config.loss_spec(p)
        fc_true = dynamic_forecasts(true_spec, sigma2_true, p, with_es=with_es)
        fc_alt = dynamic_forecasts(competitor, sigma2_alt, p, with_es=with_es)
        l_true = scoring.loss_series(spec, fc_true, path.returns).values
        l_alt = scoring.loss_series(spec, fc_alt, path.returns).values
        out[(p, None)] = l_true - l_alt
    return out


def _pairwise_rep(config: ExperimentConfig, rep: int, master_seed: int) -> np.ndarray:
    """Per-cell (reject, dbar_sign, t_statistic) for one replication."""
    diffs = _pairwise_differentials(config, rep, master_seed)
    cells = _pairwise_cells(config)
    out = np.empty((len(cells), 3))
    for c, (p, ps, P) in enumerate(cells):
        d = diffs[(p, ps)][:P]
        if config.B > 0:
            block = config.block_length
            if block is None:
                block = 1 if config.is_static else default_block_length(P)
            est: eqtest.VarianceEstimator = MovingBlockBootstrap(config.B, block)
            rng = _cell_stream(master_seed, rep, p, ps, P)
        else:
            est = IidSample()
            rng = None
        try:
            outcome = dm_test(d, alpha=config.alpha, est=est, rng=rng)
        except eqtest.DegenerateDifferentialError:
            # a constant differential (e.g. no tail exceedance in the window)
            # carries no evidence either way: count it as a non-rejection
            out[c] = (0.0, 0.0, np.nan)
            continue
        out[c] = (float(outcome.reject), float(outcome.dbar_sign), outcome.statistic)
    return out


def _pairwise_chunk(config: ExperimentConfig, master_seed: int, reps: Iterable[int]) -> np.ndarray:
    return np.stack([_pairwise_rep(config, rep, master_seed) for rep in reps])


# ---------------------------------------------------------------------------
# MCS scenarios


def _mcs_models(config: ExperimentConfig) -> list[ModelSpec]:
    kind = "M5" if config.scenario == "mcs_m5" else "M10"
    return model_set(kind, config.nu)


def _mcs_rep(
    config: ExperimentConfig, rep: int, master_seed: int, models: list[ModelSpec]
) -> tuple[np.ndarray, np.ndarray]:
    """Eliminated-model mask and sign matrix per (p, P) cell for one replication."""
    rng = _rep_stream(master_seed, rep)
    max_P = max(config.P_sizes)
    with_es = config.loss != "gpl"
    true_spec = models[0]
    path = simulate_path(true_spec, max_P, rng, burn_in=config.burn_in)
    losses_by_p: dict[float, np.ndarray] = {}
    for p in config.p_levels:
        spec = config.loss_spec(p)
        cols = []
        for model in models:
            sigma2 = filter_volatility(model, path)
            fc = dynamic_forecasts(model, sigma2, p, with_es=with_es)
            cols.append(scoring.loss_series(spec, fc, path.returns).values)
        losses_by_p[p] = np.column_stack(cols)

    m = len(models)
    labels = [spec.label for spec in models]
    cells = [(p, P) for p in config.p_levels for P in config.P_sizes]
    eliminated = np.zeros((len(cells), m), dtype=bool)
    dbar_negative = np.zeros((len(cells), m, m), dtype=bool)
    for c, (p, P) in enumerate(cells):
        values = losses_by_p[p][:P]
        block = config.block_length or default_block_length(P)
        mcs_cfg = McsConfig(
            alpha=config.alpha,
            statistic=config.statistic,
            B=config.B,
            block_length=block,
        )
        cell_rng = _cell_stream(master_seed, rep, p, None, P)
        result = run_mcs(LossMatrix(values, labels), mcs_cfg, cell_rng)
        surviving = set(result.surviving)
        eliminated[c] = [label not in surviving for label in labels]
        colmeans = values.mean(axis=0)
        dbar_negative[c] = colmeans[:, None] < colmeans[None, :]
    return eliminated, dbar_negative


def _mcs_chunk(
    config: ExperimentConfig, master_seed: int, reps: Iterable[int]
) -> tuple[np.ndarray, np.ndarray]:
    models = _mcs_models(config)
    outs = [_mcs_rep(config, rep, master_seed, models) for rep in reps]
    return (
        np.stack([o[0] for o in outs]),
        np.stack([o[1] for o in outs]),
    )


# ---------------------------------------------------------------------------
# aggregation


@dataclass
class MetricsTable:
    """Aggregated experiment metrics, one list of row dicts per CSV family."""

    pairwise_rows: list[dict] = field(default_factory=list)
    mcs_rows: list[dict] = field(default_factory=list)
    rejection_rows: list[dict] = field(default_factory=list)
    sign_rows: list[dict] = field(default_factory=list)
    statistics: dict[tuple, np.ndarray] = field(default_factory=dict)

    def write_csvs(self, out_dir: str | Path) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        families = (
            (
                "pairwise.csv",
                self.pairwise_rows,
                "scenario,loss,b_or_param,nu,p,P,power,type3,reject_rate,mc_se,replications",
            ),
            (
                "mcs.csv",
                self.mcs_rows,
                "scenario,loss,param,nu,p,P,alpha,statistic,potency,avg_set_size,mc_se,replications",
            ),
            (
                "rejections.csv",
                self.rejection_rows,
                "scenario,nu,p,P,model_label,rejection_frequency",
            ),
            (
                "signs.csv",
                self.sign_rows,
                "scenario,nu,p,P,model_i,model_j,freq_dbar_negative",
            ),
        )
        for name, rows, header in families:
            if not rows:
                continue
            path = out_dir / name
            with open(path, "w", encoding="utf-8") as fh:
                columns = header.split(",")
                fh.write(header + "\n")
                for row in rows:
                    fh.write(",".join(_csv_field(row[col]) for col in columns) + "\n")
            written.append(path)
        return written


def _csv_field(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _chunk_indices(replications: int, workers: int) -> list[range]:
    workers = max(1, min(workers, replications))
    bounds = np.linspace(0, replications, workers + 1, dtype=int)
    return [range(bounds[i], bounds[i + 1]) for i in range(workers) if bounds[i] < bounds[i + 1]]


def _scenario_tag(config: ExperimentConfig, p_star: float | None) -> str:
    if p_star is None:
        return config.scenario
    return f"{config.scenario}(p_star={p_star:g})"


def run_experiment(
    config: ExperimentConfig, master_seed: int, workers: int = 1
) -> MetricsTable:
    """Run all replications of one experiment and aggregate the metrics."""
    if config.scenario in PAIRWISE_SCENARIOS:
        return _run_pairwise(config, master_seed, workers)
    return _run_mcs_experiment(config, master_seed, workers)


def _map_chunks(fn, config, master_seed, workers):
    chunks = _chunk_indices(config.replications, workers)
    if len(chunks) == 1:
        return [fn(config, master_seed, chunks[0])]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(fn, config, master_seed, chunk) for chunk in chunks]
        return [f.result() for f in futures]


def _run_pairwise(config: ExperimentConfig, master_seed: int, workers: int) -> MetricsTable:
    results = np.concatenate(_map_chunks(_pairwise_chunk, config, master_seed, workers))
    cells = _pairwise_cells(config)
    R = config.replications
    table = MetricsTable()
    # model 1 issues the true conditional functionals, so strict consistency
    # fixes the expected differential's sign at -1 in every comparison; the
    # oracle module's quadrature agreement with this sign is exercised in tests
    true_sign = -1.0
    for c, (p, ps, P) in enumerate(cells):
        reject = results[:, c, 0]
        signs = results[:, c, 1]
        power = float(np.mean((reject == 1.0) & (signs == true_sign)))
        type3 = float(np.mean((reject == 1.0) & (signs != true_sign)))
        reject_rate = float(reject.mean())
        mc_se = math.sqrt(max(power * (1.0 - power), 0.25 / R) / R)
        table.pairwise_rows.append(
            {
                "scenario": _scenario_tag(config, ps),
                "loss": config.loss,
                "b_or_param": config.loss_param,
                "nu": f"{config.nu:g}",
                "p": f"{p:g}",
                "P": P,
                "power": power,
                "type3": type3,
                "reject_rate": reject_rate,
                "mc_se": mc_se,
                "replications": R,
            }
        )
        if config.collect_statistics:
            table.statistics[(p, ps, P)] = results[:, c, 2].copy()
    return table


def _run_mcs_experiment(config: ExperimentConfig, master_seed: int, workers: int) -> MetricsTable:
    models = _mcs_models(config)
    labels = [spec.label for spec in models]
    chunk_results = _map_chunks(_mcs_chunk, config, master_seed, workers)
    eliminated = np.concatenate([r[0] for r in chunk_results])
    dbar_negative = np.concatenate([r[1] for r in chunk_results])
    cells = [(p, P) for p in config.p_levels for P in config.P_sizes]
    R = config.replications

    rankings = {
        p: oracle.rank_models_simulated(
            models,
            models[0],
            config.loss_spec(p),
            n=config.oracle_n,
            seed=np.random.SeedSequence(master_seed, spawn_key=(0xFFFFFFFF,)),
            burn_in=config.burn_in,
        )
        for p in config.p_levels
    }

    table = MetricsTable()
    for c, (p, P) in enumerate(cells):
        best_idx = [labels.index(lab) for lab in rankings[p].best_set]
        retained = ~eliminated[:, c, best_idx].any(axis=1)
        potency = float(retained.mean())
        set_sizes = len(labels) - eliminated[:, c].sum(axis=1)
        avg_set_size = float(set_sizes.mean())
        mc_se = float(set_sizes.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0
        table.mcs_rows.append(
            {
                "scenario": config.scenario,
                "loss": config.loss,
                "param": config.loss_param,
                "nu": f"{config.nu:g}",
                "p": f"{p:g}",
                "P": P,
                "alpha": config.alpha,
                "statistic": config.statistic,
                "potency": potency,
                "avg_set_size": avg_set_size,
                "mc_se": mc_se,
                "replications": R,
            }
        )
        for k, label in enumerate(labels):
            table.rejection_rows.append(
                {
                    "scenario": config.scenario,
                    "nu": f"{config.nu:g}",
                    "p": f"{p:g}",
                    "P": P,
                    "model_label": label,
                    "rejection_frequency": float(eliminated[:, c, k].mean()),
                }
            )
        for i, label_i in enumerate(labels):
            for j, label_j in enumerate(labels):
                if i == j:
                    continue
                table.sign_rows.append(
                    {
                        "scenario": config.scenario,
                        "nu": f"{config.nu:g}",
                        "p": f"{p:g}",
                        "P": P,
                        "model_i": label_i,
                        "model_j": label_j,
                        "freq_dbar_negative": float(dbar_negative[:, c, i, j].mean()),
                    }
                )
    return table


def sign_frequency_matrix(dbar_negative: np.ndarray) -> np.ndarray:
    """Fraction of replications with dbar_ij < 0 from stacked sign indicators."""
    dbar_negative = np.asarray(dbar_negative, dtype=float)
    if dbar_negative.ndim != 3:
        raise ValueError("expected stacked (replication, i, j) sign indicators")
    return dbar_negative.mean(axis=0)
