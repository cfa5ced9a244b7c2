"""Command-line front end: benchmark runner, audit campaigns, bound tables.

Flags may also be supplied through a JSON config file (``--config``); values
given on the command line override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audits import AUDIT_KINDS, run_audit_campaign
from .bounds import (
    BoundInputs,
    euclidean_ball_bregman_diameter,
    q_delta,
    r_delta,
    sgd_excess_bound,
    smd_excess_bound,
)
from .datasets import CsvSchema, load_dataset
from .experiment import METHODS, ExperimentConfig, run_experiment
from .results import emit_results


def _add_bench_parser(subparsers):
    p = subparsers.add_parser("bench", help="run the benchmark protocol")
    p.add_argument("--dataset", help="CSV path or synthetic:<k=v,...> spec")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--trials", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--anchor-refresh-epochs", type=int,
                   help="re-anchor the robust method every K epochs (0 = never)")
    p.add_argument("--label", help="label column for CSV datasets")
    p.add_argument("--categorical", help="comma-separated categorical columns")
    p.add_argument("--drop", help="comma-separated columns to ignore")
    p.add_argument("--no-header", action="store_true",
                   help="CSV has no header row (columns become col0, col1, ...)")
    p.add_argument("--timings", action="store_true",
                   help="record wall times (breaks byte-for-byte reproducibility)")


def _add_audit_parser(subparsers):
    p = subparsers.add_parser("audit", help="run a Monte Carlo audit campaign")
    p.add_argument("--kind", choices=sorted(AUDIT_KINDS))
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the report as JSON to this file")


def _add_bounds_parser(subparsers):
    p = subparsers.add_parser("bounds", help="print the deviation/excess-risk table")
    p.add_argument("--D", type=float, help="feasible-set diameter")
    p.add_argument("--sigma", type=float, help="certified noise bound")
    p.add_argument("--lambda", type=float, dest="smoothness", help="smoothness constant")
    p.add_argument("--delta", type=float)
    p.add_argument("--T", type=int, dest="horizon")
    p.add_argument("--beta", type=float, help="constant step size (enables SGD/SMD rows)")
    p.add_argument("--weights", choices=["constant"], help="weight schedule (constant only)")


BENCH_DEFAULTS = {
    "dataset": None,
    "method": "anytime-robust-sgd",
    "trials": 10,
    "epochs": 5,
    "batch": 8,
    "delta": 0.05,
    "seed": 0,
    "out": "results",
    "anchor_refresh_epochs": 0,
    "label": None,
    "categorical": None,
    "drop": None,
    "no_header": False,
    "timings": False,
}
AUDIT_DEFAULTS = {"kind": None, "replications": 1000, "seed": 0, "out": None}
BOUNDS_DEFAULTS = {
    "D": None,
    "sigma": None,
    "smoothness": None,
    "delta": 0.05,
    "horizon": None,
    "beta": None,
    "weights": "constant",
}


def _merge(args, file_config, defaults):
    """Resolution order: CLI flag > config file > built-in default."""
    merged = {}
    for key, fallback in defaults.items():
        flag = getattr(args, key, None)
        if isinstance(fallback, bool):
            merged[key] = flag or bool(file_config.get(key, fallback))
        else:
            merged[key] = flag if flag is not None else file_config.get(key, fallback)
    return merged


def _require(merged, *keys):
    missing = [k for k in keys if merged.get(k) is None]
    if missing:
        raise SystemExit(f"missing required option(s): {', '.join('--' + k for k in missing)}")


def _split_csv_list(text):
    return tuple(s.strip() for s in text.split(",") if s.strip()) if text else ()


def cmd_bench(merged):
    _require(merged, "dataset")
    schema = None
    if not str(merged["dataset"]).startswith("synthetic"):
        _require(merged, "label")
        schema = CsvSchema(
            label=merged["label"],
            categorical=_split_csv_list(merged["categorical"]),
            drop=_split_csv_list(merged["drop"]),
            has_header=not merged["no_header"],
        )
    dataset = load_dataset(merged["dataset"], schema)
    config = ExperimentConfig(
        method=merged["method"],
        trials=merged["trials"],
        epochs=merged["epochs"],
        batch_size=merged["batch"],
        delta=merged["delta"],
        master_seed=merged["seed"],
        anchor_refresh_epochs=merged["anchor_refresh_epochs"],
        timings=merged["timings"],
    )
    records = run_experiment(config, dataset)
    out = Path(merged["out"])
    csv_path, csv_summary = emit_results(records, "csv", out / "results.csv")
    emit_results(records, "json", out / "results.json")
    print(f"{len(records)} records ({config.method}, {config.trials} trials, "
          f"{config.epochs} epochs) -> {csv_path}")
    print(f"summary -> {csv_summary}")
    return 0


def cmd_audit(merged):
    _require(merged, "kind")
    report = run_audit_campaign(merged["kind"], merged["replications"], merged["seed"])
    for line in report.lines():
        print(line)
    if merged["out"]:
        payload = {
            "kind": report.kind,
            "replications": report.replications,
            "violations": report.violations,
            "frequency": report.frequency,
            "standard_error": report.standard_error,
            "limit": report.limit,
            "passed": report.passed,
            "details": {k: (v if isinstance(v, (int, float, str, bool)) else float(v))
                        for k, v in report.details.items()},
        }
        out = Path(merged["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"report -> {out}")
    return 0 if report.passed else 1


def cmd_bounds(merged):
    _require(merged, "D", "sigma", "smoothness", "horizon")
    beta = merged["beta"]
    inputs = BoundInputs.constant(
        diameter=merged["D"],
        sigma=merged["sigma"],
        smoothness=merged["smoothness"],
        delta=merged["delta"],
        horizon=merged["horizon"],
        beta=beta,
        bregman_diameter=euclidean_ball_bregman_diameter(merged["D"]),
    )
    rows = [
        ("q_delta", q_delta(inputs)),
        ("r_delta", r_delta(inputs)),
        ("max{q_delta, r_delta}", max(q_delta(inputs), r_delta(inputs))),
    ]
    if beta is not None:
        for name, bound in (("sgd_excess_bound", sgd_excess_bound),
                            ("smd_excess_bound (ball, D_Phi = 2 D^2)", smd_excess_bound)):
            try:
                rows.append((name, bound(inputs)))
            except ValueError as err:
                rows.append((name, f"unavailable: {err}"))
    width = max(len(name) for name, _ in rows)
    print(f"D={merged['D']:g} sigma={merged['sigma']:g} lambda={merged['smoothness']:g} "
          f"delta={merged['delta']:g} T={merged['horizon']} "
          + (f"beta={beta:g}" if beta is not None else "beta=-"))
    for name, value in rows:
        shown = f"{value:.10g}" if isinstance(value, float) else value
        print(f"{name:<{width}}  {shown}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anyopt",
        description="Anytime robust stochastic optimization: benchmarks, audits, bounds.",
    )
    parser.add_argument("--config", help="JSON file with default option values")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_bench_parser(subparsers)
    _add_audit_parser(subparsers)
    _add_bounds_parser(subparsers)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    file_config = {}
    if args.config:
        file_config = json.loads(Path(args.config).read_text())
        if not isinstance(file_config, dict):
            raise SystemExit("--config must contain a JSON object")
    if args.command == "bench":
        return cmd_bench(_merge(args, file_config, BENCH_DEFAULTS))
    if args.command == "audit":
        return cmd_audit(_merge(args, file_config, AUDIT_DEFAULTS))
    return cmd_bounds(_merge(args, file_config, BOUNDS_DEFAULTS))


if __name__ == "__main__":
    sys.exit(main())
