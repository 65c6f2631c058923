"""Command-line front end.

Subcommands: ``experiment`` (run a configured Monte Carlo experiment and
write the metric CSVs plus a run manifest), ``score`` (loss series for a
user-supplied forecast CSV), ``dm`` (equal-predictive-ability test of two
loss columns), ``mcs`` (model confidence set of a wide loss matrix), and
``oracle`` (closed-form reference values). Every command is a thin adapter
over the library; no numeric logic lives here.

Exit codes: 0 success, 1 runtime failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import csv
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import oracle, scoring
from .distributions import InnovationDistribution, StandardNormal, StandardizedStudentT
from .eqtest import IidSample, MovingBlockBootstrap, dm_test
from .forecasting import ForecastSeries
from .harness import ExperimentConfig, run_experiment
from .mcs import LossMatrix, McsConfig, export_mcs_csv, run_mcs

USAGE_ERROR = 2
RUNTIME_ERROR = 1

_CONFIG_FIELDS = {
    "scenario": str,
    "p_levels": tuple,
    "P_sizes": tuple,
    "nu": float,
    "loss": str,
    "b": float,
    "alpha": float,
    "replications": int,
    "B": int,
    "block_length": int,
    "p_star": tuple,
    "statistic": str,
    "burn_in": int,
    "collect_statistics": bool,
    "oracle_n": int,
}


class SchemaError(ValueError):
    """Raised for malformed config files or input CSVs."""


@dataclass
class RunManifest:
    config_path: str
    out_dir: str
    workers: int
    master_seed: int
    version: str

    def write(self, out_dir: Path) -> None:
        with open(out_dir / "manifest.txt", "w", encoding="utf-8") as fh:
            fh.write(f"config = {self.config_path}\n")
            fh.write(f"out = {self.out_dir}\n")
            fh.write(f"workers = {self.workers}\n")
            fh.write(f"seed = {self.master_seed}\n")
            fh.write(f"version = {self.version}\n")


def _package_version() -> str:
    try:
        return metadata.version("tailrisk")
    except metadata.PackageNotFoundError:
        return "unknown"


def _parse_dist(spec: str) -> InnovationDistribution:
    if spec == "normal":
        return StandardNormal()
    if spec.startswith("t"):
        try:
            return StandardizedStudentT(float(spec[1:]))
        except ValueError as exc:
            raise SchemaError(f"bad distribution {spec!r}: {exc}") from exc
    raise SchemaError(f"distribution must be 'normal' or 't<nu>', got {spec!r}")


def _load_config(path: str) -> tuple[ExperimentConfig, int | None]:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"config file does not parse: {exc}") from exc
    seed = raw.pop("master_seed", None)
    if seed is not None and not isinstance(seed, int):
        raise SchemaError(f"master_seed must be an integer, got {seed!r}")
    unknown = set(raw) - set(_CONFIG_FIELDS)
    if unknown:
        raise SchemaError(f"unknown config fields: {sorted(unknown)}")
    if "scenario" not in raw:
        raise SchemaError("config is missing the required 'scenario' field")
    kwargs = {}
    for key, value in raw.items():
        want = _CONFIG_FIELDS[key]
        if want is tuple:
            if not isinstance(value, list):
                raise SchemaError(f"field {key!r} must be a list, got {value!r}")
            kwargs[key] = tuple(value)
        elif want is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            kwargs[key] = float(value)
        elif not isinstance(value, want) or isinstance(value, bool) is not (want is bool):
            raise SchemaError(f"field {key!r} must be {want.__name__}, got {value!r}")
        else:
            kwargs[key] = value
    try:
        return ExperimentConfig(**kwargs), seed
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def _read_csv(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: empty file")
            missing = [col for col in required if col not in reader.fieldnames]
            if missing:
                raise SchemaError(f"{path}: missing columns {missing}")
            rows = list(reader)
    except FileNotFoundError as exc:
        raise SchemaError(f"input file not found: {path}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for col in reader.fieldnames:
        cells = [row[col] for row in rows]
        if all(cell not in (None, "") for cell in cells):
            try:
                out[col] = np.array([float(c) for c in cells])
            except ValueError as exc:
                raise SchemaError(f"{path}: non-numeric value in column {col!r}") from exc
    missing = [col for col in required if col not in out]
    if missing:
        raise SchemaError(f"{path}: columns {missing} contain blank cells")
    return out


def _variance_estimator(args) -> IidSample | MovingBlockBootstrap:
    if args.estimator == "iid":
        return IidSample()
    return MovingBlockBootstrap(B=args.B, block_length=args.block)


# ---------------------------------------------------------------------------
# subcommands


def cmd_experiment(args) -> int:
    config, config_seed = _load_config(args.config)
    seed = args.seed if args.seed is not None else config_seed
    if seed is None:
        raise SchemaError(
            "experiment mode needs a master seed (--seed or master_seed in the config)"
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = run_experiment(config, master_seed=seed, workers=args.workers)
    table.write_csvs(out_dir)
    RunManifest(args.config, str(out_dir), args.workers, seed, _package_version()).write(out_dir)
    return 0


def cmd_score(args) -> int:
    data = _read_csv(args.input, ("y", "var"))
    if args.loss == "gpl":
        spec = scoring.QuantileLossSpec(p=args.p, b=args.b)
    else:
        spec = scoring.JointLossSpec(p=args.p, parametrization=args.loss)
    if spec.requires_es and "es" not in data:
        raise SchemaError("joint loss families need an 'es' column")
    es = data.get("es") if spec.requires_es else None
    forecasts = ForecastSeries(args.p, data["var"], es)
    series = scoring.loss_series(spec, forecasts, data["y"])
    sys.stdout.write("t,loss\n")
    for t, value in enumerate(series.values):
        sys.stdout.write(f"{t},{float(value)!r}\n")
    return 0


def cmd_dm(args) -> int:
    data = _read_csv(args.input, ("loss_a", "loss_b"))
    d = data["loss_a"] - data["loss_b"]
    est = _variance_estimator(args)
    rng = None
    if isinstance(est, MovingBlockBootstrap):
        if args.seed is None:
            raise SchemaError("the bootstrap estimator needs --seed")
        rng = np.random.default_rng(args.seed)
    outcome = dm_test(d, alpha=args.alpha, est=est, rng=rng)
    verdict = "reject" if outcome.reject else "fail-to-reject"
    sys.stdout.write(
        f"# {verdict} equal predictive ability at alpha={args.alpha:g} "
        f"(dbar sign {outcome.dbar_sign:+d})\n"
    )
    sys.stdout.write("statistic,pvalue,reject,dbar_sign,alpha\n")
    sys.stdout.write(
        f"{outcome.statistic!r},{outcome.pvalue!r},{int(outcome.reject)},"
        f"{outcome.dbar_sign},{outcome.alpha!r}\n"
    )
    return 0


def cmd_mcs(args) -> int:
    data = _read_csv(args.input, ())
    labels = list(data)
    if len(labels) < 2:
        raise SchemaError("the loss matrix needs at least two model columns")
    losses = LossMatrix(np.column_stack([data[label] for label in labels]), labels)
    config = McsConfig(
        alpha=args.alpha, statistic=args.statistic, B=args.B, block_length=args.block
    )
    if args.seed is None:
        raise SchemaError("the model confidence set bootstrap needs --seed")
    result = run_mcs(losses, config, np.random.default_rng(args.seed))
    export_mcs_csv(result, sys.stdout)
    return 0


def cmd_oracle(args) -> int:
    dist = _parse_dist(args.dist)
    if args.query == "quantile":
        sys.stdout.write(f"{dist.quantile(args.p)!r}\n")
    elif args.query == "es":
        sys.stdout.write(f"{dist.expected_shortfall(args.p)!r}\n")
    elif args.query == "expected-diff":
        if args.q2 is None:
            raise SchemaError("expected-diff needs --q2 (the competing quantile forecast)")
        q1 = args.q1 if args.q1 is not None else dist.quantile(args.p)
        value = oracle.expected_tick_diff_static(dist, q1, args.q2, args.p)
        sys.stdout.write(f"{value!r}\n")
    else:  # variance-formula
        if args.input is None:
            raise SchemaError("variance-formula needs --input (a covariance CSV)")
        data = _read_csv(args.input, ())
        cov = np.column_stack([data[col] for col in data])
        value = oracle.variance_of_centered_differential(cov, args.index)
        sys.stdout.write(f"{value!r}\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailrisk",
        description="Scoring, comparison tests, and Monte Carlo experiments "
        "for VaR/ES forecasts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("experiment", help="run a configured Monte Carlo experiment")
    p_exp.add_argument("--config", required=True, help="TOML experiment config")
    p_exp.add_argument("--out", required=True, help="output directory for CSVs")
    p_exp.add_argument("--workers", type=int, default=1)
    p_exp.add_argument("--seed", type=int, default=None, help="master seed")
    p_exp.set_defaults(fn=cmd_experiment)

    p_score = sub.add_parser("score", help="score a forecast CSV (columns y,var[,es])")
    p_score.add_argument("input")
    p_score.add_argument("--p", type=float, required=True)
    p_score.add_argument("--loss", choices=("gpl", "al", "nz", "fzg"), default="gpl")
    p_score.add_argument("--b", type=float, default=1.0)
    p_score.set_defaults(fn=cmd_score)

    p_dm = sub.add_parser("dm", help="equal-predictive-ability test (columns loss_a,loss_b)")
    p_dm.add_argument("input")
    p_dm.add_argument("--alpha", type=float, default=0.05)
    p_dm.add_argument("--estimator", choices=("iid", "mbb"), default="iid")
    p_dm.add_argument("--B", type=int, default=1000)
    p_dm.add_argument("--block", type=int, default=None)
    p_dm.add_argument("--seed", type=int, default=None)
    p_dm.set_defaults(fn=cmd_dm)

    p_mcs = sub.add_parser("mcs", help="model confidence set of a wide loss-matrix CSV")
    p_mcs.add_argument("input")
    p_mcs.add_argument("--alpha", type=float, default=0.25)
    p_mcs.add_argument("--statistic", choices=("tmax", "tr"), default="tmax")
    p_mcs.add_argument("--B", type=int, default=5000)
    p_mcs.add_argument("--block", type=int, default=None)
    p_mcs.add_argument("--seed", type=int, default=None)
    p_mcs.set_defaults(fn=cmd_mcs)

    p_oracle = sub.add_parser("oracle", help="closed-form reference values")
    p_oracle.add_argument(
        "query", choices=("quantile", "es", "expected-diff", "variance-formula")
    )
    p_oracle.add_argument("--dist", default="normal", help="'normal' or 't<nu>'")
    p_oracle.add_argument("--p", type=float, default=0.01)
    p_oracle.add_argument("--q1", type=float, default=None)
    p_oracle.add_argument("--q2", type=float, default=None)
    p_oracle.add_argument("--input", default=None, help="covariance CSV for variance-formula")
    p_oracle.add_argument("--index", type=int, default=0)
    p_oracle.set_defaults(fn=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; keep its codes
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (SchemaError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001 - map any runtime failure to exit 1
        sys.stderr.write(f"failure: {exc}\n")
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
