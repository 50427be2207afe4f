"""Command line entry point: the batch pipeline behind `plantopt`.

Subcommands mirror the workflow: ingest a CSV, train the TE/THR
surrogates, explain them, sweep the tolerance grid, account fleet CO2,
or serve the HTTP API. Settings come from an optional JSON config file
with command line flags taking precedence; every command validates its
full configuration before touching data, writes versioned report
documents under the output directory, and is byte-identical on reruns
with the same config and seed.

Exit codes: 0 success, 2 configuration or validation error, 3 runtime
or solver failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .carbon import fleet_report, load_fleet
from .cobyla import CobylaSettings
from .conformal import ConformalCalibration, calibrate
from .data import (
    DataTable,
    ScalingParams,
    fit_scaler,
    ingest_csv,
    plant_schema,
    restrict_scaler,
    scale,
    split,
)
from .errors import PlantOptError, SolverError, ValidationError
from .evaluate import QUANTILE_LEVELS
from .evaluate import sweep as run_sweep
from .explain import contribution_percentages
from .gbt import (
    HyperParams,
    model_from_dict,
    model_to_dict,
    predict_batch,
    regression_metrics,
    train_gbt,
)
from .optimize import ObjectiveSpec, OptimizationProblem, tolerance_chain
from .synthetic import cluster_schema
from .tuning import tune_tpe

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

BUNDLE_SCHEMA_VERSION = 1
DEFAULT_TAUS = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30)
SCHEMAS = {"plant": plant_schema, "cluster": cluster_schema}
DEFAULT_CHAINS = {
    "plant": ("CFR", "TAF", "MSF", "Power"),
    "cluster": ("A", "B", "C"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings shared by every subcommand."""

    dataset: str | None = None
    schema: str = "plant"
    seed: int = 0
    train_fraction: float = 0.64
    calibration_fraction: float = 0.16
    tuning_budget: int = 0
    alpha: float = 0.05
    taus: tuple = DEFAULT_TAUS
    bounds: dict = field(default_factory=dict)
    quantile_levels: tuple = QUANTILE_LEVELS
    chain: tuple | None = None
    n_guesses: int = 219
    guess_seed: int = 1
    weights: tuple = (1.0, 1.0)
    hyperparams: dict = field(default_factory=dict)
    solver: dict = field(
        default_factory=lambda: {"rho_beg": 0.1, "rho_end": 1e-3, "maxfun": 150}
    )
    delta_pp: float = 0.64
    fleet: str | None = None
    output_dir: str = "out"
    jobs: int = 1
    bundle: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    token: str | None = None
    artifacts_dir: str | None = None

    def validate(self) -> "RunConfig":
        if self.schema not in SCHEMAS:
            raise ValidationError(
                f"unknown schema {self.schema!r}; choose from {sorted(SCHEMAS)}"
            )
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must be in (0, 1)")
        if not 0.0 <= self.calibration_fraction < 1.0:
            raise ValidationError("calibration_fraction must be in [0, 1)")
        if self.train_fraction + self.calibration_fraction >= 1.0:
            raise ValidationError("train + calibration fractions must leave room for test")
        if self.tuning_budget < 0:
            raise ValidationError("tuning_budget must be nonnegative")
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("alpha must lie in (0, 1)")
        taus = tuple(float(t) for t in self.taus)
        if not taus or any(t <= 0 for t in taus) or len(set(taus)) != len(taus):
            raise ValidationError("taus must be a nonempty list of distinct positive values")
        if tuple(int(q) for q in self.quantile_levels) != QUANTILE_LEVELS:
            raise ValidationError(f"quantile_levels are fixed to {QUANTILE_LEVELS}")
        for name, pair in self.bounds.items():
            lo, hi = (float(pair[0]), float(pair[1]))
            if not (0.0 <= lo < hi <= 1.0):
                raise ValidationError(
                    f"bounds override for {name!r} must satisfy 0 <= lo < hi <= 1"
                )
        if self.chain is not None and len(self.chain) == 1:
            raise ValidationError("a tolerance chain needs at least two features")
        if self.n_guesses < 1:
            raise ValidationError("n_guesses must be at least 1")
        if len(self.weights) != 2 or not all(np.isfinite(self.weights)):
            raise ValidationError("weights must be two finite numbers")
        try:
            CobylaSettings(**self.solver)
        except TypeError as exc:
            raise ValidationError(f"bad solver settings: {exc}") from exc
        if self.hyperparams:
            try:
                HyperParams(**self.hyperparams)
            except TypeError as exc:
                raise ValidationError(f"bad hyperparams: {exc}") from exc
        if self.delta_pp < 0:
            raise ValidationError("delta_pp must be nonnegative")
        if self.jobs < 1:
            raise ValidationError("jobs must be at least 1")
        if not 1 <= self.port <= 65535:
            raise ValidationError("port must lie in [1, 65535]")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ValidationError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        for key in ("taus", "quantile_levels", "chain", "weights"):
            if key in doc and doc[key] is not None:
                doc[key] = tuple(doc[key])
        return cls(**doc)


def _parse_listish(raw, cast):
    if raw is None:
        return None
    if isinstance(raw, str):
        raw = [p.strip() for p in raw.split(",") if p.strip()]
    try:
        return tuple(cast(p) for p in raw)
    except ValueError as exc:
        raise ValidationError(f"bad list value: {exc}") from exc


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    for name in (
        "dataset",
        "schema",
        "seed",
        "output_dir",
        "jobs",
        "tuning_budget",
        "alpha",
        "train_fraction",
        "calibration_fraction",
        "n_guesses",
        "guess_seed",
        "bundle",
        "fleet",
        "delta_pp",
        "host",
        "port",
        "token",
        "artifacts_dir",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    taus = _parse_listish(getattr(args, "taus", None), float)
    if taus is not None:
        overrides["taus"] = taus
    chain = _parse_listish(getattr(args, "chain", None), str)
    if chain is not None:
        overrides["chain"] = chain
    if overrides:
        config = replace(config, **overrides)
    return config.validate()


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_table(config: RunConfig) -> DataTable:
    if not config.dataset:
        raise ValidationError("this command needs a dataset (config key or --dataset)")
    path = Path(config.dataset)
    if not path.exists():
        raise ValidationError(f"dataset file not found: {path}")
    table = ingest_csv(path.read_bytes(), SCHEMAS[config.schema]())
    return replace(table, provenance=str(path))


# ---------------------------------------------------------------- commands


def cmd_ingest(config: RunConfig) -> int:
    table = _load_table(config)
    scaler = fit_scaler(table)
    means = table.values.mean(axis=0)
    variables = []
    print(f"rows: {table.n_rows}")
    print(f"{'variable':>10s} {'unit':>8s} {'role':>12s} {'min':>12s} {'max':>12s} {'mean':>12s}")
    for i, var in enumerate(table.schema.variables):
        lo, hi, mean = scaler.minimums[i], scaler.maximums[i], means[i]
        print(f"{var.name:>10s} {var.unit:>8s} {var.role:>12s} {lo:12.4f} {hi:12.4f} {mean:12.4f}")
        variables.append(
            {
                "name": var.name,
                "unit": var.unit,
                "role": var.role,
                "minimum": float(lo),
                "maximum": float(hi),
                "mean": float(mean),
            }
        )
    _write_json(
        _out_dir(config) / "ingest_summary.json",
        {
            "schema_version": 1,
            "dataset": table.provenance,
            "schema": config.schema,
            "n_rows": table.n_rows,
            "variables": variables,
        },
    )
    return EXIT_OK


def _train_one(config: RunConfig, x_train, y_train, op_names, target: str):
    if config.tuning_budget > 0:
        hp, _ = tune_tpe(
            x_train, y_train, budget=config.tuning_budget, seed=config.seed
        )
    else:
        hp = HyperParams(**config.hyperparams)
    model = train_gbt(x_train, y_train, hp, feature_names=op_names, target_name=target)
    return model, hp


def train_bundle(config: RunConfig, table: DataTable) -> dict:
    """Train both surrogates and assemble the serialized model bundle."""
    schema = table.schema
    if not {"TE", "THR"} <= set(schema.performance_names):
        raise ValidationError("the schema must declare TE and THR performance variables")
    splits = split(table, config.train_fraction, config.calibration_fraction, config.seed)
    op_names = tuple(schema.operating_names)
    scaler = restrict_scaler(fit_scaler(table, splits.train_indices), op_names)
    x = scale(table.operating_matrix(), scaler)
    tr, cal, ts = splits.train_indices, splits.calibration_indices, splits.test_indices

    targets: dict = {}
    for target in ("TE", "THR"):
        y = table.column(target)
        model, hp = _train_one(config, x[tr], y[tr], op_names, target)
        train_metrics = regression_metrics(y[tr], predict_batch(model, x[tr]))
        test_metrics = regression_metrics(y[ts], predict_batch(model, x[ts]))
        calibration = None
        if len(cal) > 0:
            calibration = calibrate(model, x[cal], y[cal], config.alpha)
        targets[target] = {
            "model": model_to_dict(model),
            "hyperparams": hp.to_dict(),
            "calibration": None if calibration is None else calibration.to_dict(),
            "norm": [float(y[tr].min()), float(y[tr].max())],
            "metrics": {"train": train_metrics.to_dict(), "test": test_metrics.to_dict()},
        }

    return {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "schema": config.schema,
        "dataset": table.provenance,
        "seed": config.seed,
        "alpha": config.alpha,
        "fractions": {
            "train": config.train_fraction,
            "calibration": config.calibration_fraction,
        },
        "feature_names": list(op_names),
        "scaler": scaler.to_dict(),
        "targets": targets,
    }


def cmd_train(config: RunConfig) -> int:
    table = _load_table(config)
    bundle = train_bundle(config, table)
    for target in ("TE", "THR"):
        metrics = bundle["targets"][target]["metrics"]
        print(
            f"{target}: train R2 {metrics['train']['r2']:.4f}"
            f" RMSE {metrics['train']['rmse']:.4f}"
            f" | test R2 {metrics['test']['r2']:.4f}"
            f" RMSE {metrics['test']['rmse']:.4f}"
        )
    _write_json(_out_dir(config) / "model_bundle.json", bundle)
    return EXIT_OK


def _load_bundle(config: RunConfig) -> dict:
    path = Path(config.bundle) if config.bundle else _out_dir(config) / "model_bundle.json"
    if not path.exists():
        raise ValidationError(f"model bundle not found at {path}; run `train` first")
    doc = json.loads(path.read_text())
    if doc.get("schema_version") != BUNDLE_SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported model bundle schema_version {doc.get('schema_version')!r}"
        )
    return doc


def cmd_explain(config: RunConfig, target: str) -> int:
    bundle = _load_bundle(config)
    table = _load_table(config)
    splits = split(
        table,
        bundle["fractions"]["train"],
        bundle["fractions"]["calibration"],
        bundle["seed"],
    )
    scaler = ScalingParams.from_dict(bundle["scaler"])
    x_test = scale(table.operating_matrix(), scaler)[splits.test_indices]

    wanted = ("TE", "THR") if target == "both" else (target,)
    rows = []
    for name in wanted:
        model = model_from_dict(bundle["targets"][name]["model"])
        ranking = contribution_percentages(model, x_test)
        print(f"{name} contributions over the test split:")
        for feature, percent in ranking:
            print(f"  {feature:>10s} {percent:7.2f}%")
        rows.extend((name, feature, percent) for feature, percent in ranking)

    out = _out_dir(config)
    _write_json(
        out / "shap_contributions.json",
        {
            "schema_version": 1,
            "evaluation_split": "test",
            "contributions": [
                {"target": t, "feature": n, "percent": float(p)} for t, n, p in rows
            ],
        },
    )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["target", "feature", "percent"])
    for target_name, feature, percent in rows:
        writer.writerow([target_name, feature, f"{percent:.10g}"])
    (out / "shap_contributions.csv").write_text(buffer.getvalue())
    return EXIT_OK


def sweep_from_bundle(config: RunConfig, bundle: dict, table: DataTable):
    """Run the tolerance sweep for a trained bundle against its dataset."""
    schema = table.schema
    op_names = tuple(schema.operating_names)
    if list(op_names) != list(bundle["feature_names"]):
        raise ValidationError("dataset schema does not match the trained bundle")
    scaler = ScalingParams.from_dict(bundle["scaler"])
    x = scale(table.operating_matrix(), scaler)
    splits = split(
        table,
        bundle["fractions"]["train"],
        bundle["fractions"]["calibration"],
        bundle["seed"],
    )
    pool = splits.train_indices
    if config.n_guesses > len(pool):
        raise ValidationError(
            f"n_guesses {config.n_guesses} exceeds the {len(pool)} training rows"
        )
    chosen = np.random.default_rng(config.guess_seed).choice(
        pool, size=config.n_guesses, replace=False
    )
    guesses = x[chosen]

    te_doc = bundle["targets"]["TE"]
    thr_doc = bundle["targets"]["THR"]
    spec = ObjectiveSpec(
        model_from_dict(te_doc["model"]),
        model_from_dict(thr_doc["model"]),
        te_norm=tuple(te_doc["norm"]),
        thr_norm=tuple(thr_doc["norm"]),
        weights=config.weights,
    )
    chain_names = config.chain or DEFAULT_CHAINS[bundle["schema"]]
    chain = tolerance_chain(schema, chain_names, tau=float(config.taus[0]))
    bounds = None
    if config.bounds:
        bounds = np.column_stack([np.zeros(len(op_names)), np.ones(len(op_names))])
        for name, pair in config.bounds.items():
            if name not in op_names:
                raise ValidationError(f"bounds override names unknown variable {name!r}")
            bounds[op_names.index(name)] = [float(pair[0]), float(pair[1])]
    problem = OptimizationProblem(spec, bounds=bounds, constraints=chain)

    def calibration_of(doc):
        return None if doc["calibration"] is None else ConformalCalibration.from_dict(
            doc["calibration"]
        )

    return run_sweep(
        problem,
        config.taus,
        guesses,
        settings=CobylaSettings(**config.solver),
        parallelism=config.jobs,
        scaler=scaler,
        te_calibration=calibration_of(te_doc),
        thr_calibration=calibration_of(thr_doc),
    )


def cmd_sweep(config: RunConfig) -> int:
    bundle = _load_bundle(config)
    table = _load_table(config)
    op_names = tuple(table.schema.operating_names)
    report = sweep_from_bundle(config, bundle, table)

    for entry in (report.unconstrained, *report.entries):
        feasible = sum(r.feasible for r in entry.records)
        pair_text = ", ".join(f"{k}={v:.3f}" for k, v in entry.cvm_by_pair.items())
        print(f"{entry.label}: {feasible}/{len(entry.records)} feasible | CvM {pair_text}")

    out = _out_dir(config)
    _write_json(out / "sweep_report.json", report.to_dict())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["entry", "tau", "initial_guess_id", "status", "feasible", "objective_value",
         "max_chain_violation", "te_pred", "thr_pred"]
        + [f"x_{name}" for name in op_names]
    )
    for entry in (report.unconstrained, *report.entries):
        for record in entry.records:
            writer.writerow(
                [entry.label, "" if entry.tau is None else f"{entry.tau:.10g}",
                 record.initial_guess_id, record.status, record.feasible,
                 f"{record.objective_value:.10g}",
                 f"{record.max_chain_violation:.10g}",
                 f"{record.te_pred:.10g}", f"{record.thr_pred:.10g}"]
                + [f"{v:.10g}" for v in record.x_scaled]
            )
    (out / "sweep_records.csv").write_text(buffer.getvalue())
    return EXIT_OK


def cmd_carbon(config: RunConfig) -> int:
    fleet = load_fleet(config.fleet)
    report = fleet_report(fleet.plants, config.delta_pp)
    print(f"{'country':>10s} {'computed Mt':>12s} {'reference Mt':>13s}")
    for country, tonnes in report.subtotals.items():
        reference = fleet.reference_subtotals_mt.get(country)
        ref_text = "-" if reference is None else f"{reference:13.1f}"
        print(f"{country:>10s} {tonnes / 1e6:12.2f} {ref_text:>13s}")
    ref_total = fleet.reference_total_mt
    total_ref_text = "-" if ref_total is None else f"{ref_total:13.1f}"
    print(f"{'total':>10s} {report.total / 1e6:12.2f} {total_ref_text:>13s}")

    out = _out_dir(config)
    doc = report.to_dict()
    doc["schema_version"] = 1
    doc["reference_subtotals_mt"] = fleet.reference_subtotals_mt
    doc["reference_total_mt"] = fleet.reference_total_mt
    _write_json(out / "carbon_report.json", doc)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["country", "tonnes", "megatonnes"])
    for country, tonnes in report.subtotals.items():
        writer.writerow([country, f"{tonnes:.10g}", f"{tonnes / 1e6:.10g}"])
    (out / "carbon_subtotals.csv").write_text(buffer.getvalue())
    return EXIT_OK


def cmd_serve(config: RunConfig) -> int:
    if not config.token:
        raise ValidationError("serve requires an API token (config key or --token)")
    from .service import create_app

    app = create_app(
        token=config.token,
        artifacts_dir=config.artifacts_dir or str(Path(config.output_dir) / "service"),
    )
    _run_server(app, config.host, config.port)
    return EXIT_OK


def _run_server(app, host: str, port: int) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--dataset", help="CSV dataset path")
    common.add_argument("--schema", choices=sorted(SCHEMAS), help="dataset schema")
    common.add_argument("--seed", type=int, help="split seed")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--jobs", type=int, help="worker cap for parallel stages")

    parser = argparse.ArgumentParser(
        prog="plantopt",
        description="Surrogate-driven setpoint optimization pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common], help="summarize a dataset CSV")

    train = sub.add_parser("train", parents=[common], help="train TE/THR surrogates")
    train.add_argument("--budget", dest="tuning_budget", type=int, help="TPE trials; 0 uses fixed hyperparameters")
    train.add_argument("--alpha", type=float, help="conformal miscoverage level")
    train.add_argument("--train-fraction", dest="train_fraction", type=float)
    train.add_argument("--calibration-fraction", dest="calibration_fraction", type=float)

    explain = sub.add_parser("explain", parents=[common], help="feature contribution table")
    explain.add_argument("--target", choices=("TE", "THR", "both"), default="both")
    explain.add_argument("--bundle", help="model bundle path (default: <out>/model_bundle.json)")

    swp = sub.add_parser("sweep", parents=[common], help="tolerance sweep report")
    swp.add_argument("--taus", help="comma-separated tolerance grid")
    swp.add_argument("--chain", help="comma-separated chain feature names")
    swp.add_argument("--n-guesses", dest="n_guesses", type=int)
    swp.add_argument("--guess-seed", dest="guess_seed", type=int)
    swp.add_argument("--bundle", help="model bundle path (default: <out>/model_bundle.json)")

    carbon = sub.add_parser("carbon", parents=[common], help="fleet CO2 report")
    carbon.add_argument("--fleet", help="fleet config path (default: packaged fleet)")
    carbon.add_argument("--delta-pp", dest="delta_pp", type=float, help="efficiency gain in percentage points")

    serve = sub.add_parser("serve", parents=[common], help="run the HTTP API")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--token", help="static API token")
    serve.add_argument("--artifacts-dir", dest="artifacts_dir")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "train":
            return cmd_train(config)
        if args.command == "explain":
            return cmd_explain(config, args.target)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "carbon":
            return cmd_carbon(config)
        if args.command == "serve":
            return cmd_serve(config)
        raise ValidationError(f"unknown command {args.command!r}")
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except PlantOptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
