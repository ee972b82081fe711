"""Command line interface.

Subcommands:
  run                full experiment: schedules, algorithm, medians, export
  aggregate          recompute medians.csv from an existing records.csv
  validate-schedule  audit a serialized variable schedule against a dataset
  bench              time the numba and numpy message kernels side by side
"""

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import _kernels
from .data import load_csv, load_schedule, validate_schedule
from .harness import (
    METRIC_COLUMNS,
    ExperimentConfig,
    StepRecord,
    aggregate_median,
    export,
    run_experiment,
)


def _add_run_parser(sub):
    p = sub.add_parser("run", help="run an experiment and export results")
    p.add_argument("--config", help="JSON file supplying any of the flags below")
    p.add_argument("--dataset", help="CSV dataset path (features + trailing label)")
    p.add_argument("--algorithm", choices=("ap", "iapna", "app"))
    p.add_argument("--setting", choices=("uniform", "variable", "ablation"))
    p.add_argument("--seeds", type=int, nargs="+", help="explicit seed list")
    p.add_argument("--n-seeds", type=int, help="use seeds 0..n-1")
    p.add_argument("--steps", type=int)
    p.add_argument("--first-n", type=int, help="batch size at step 0 (uniform)")
    p.add_argument("--step-n", type=int, help="batch size at later steps (uniform)")
    p.add_argument("--q", type=int, help="per-category minimum (variable)")
    p.add_argument("--th-gamma", type=float, help="pruning threshold (inf disables)")
    p.add_argument("--damping", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--convergence-window", type=int)
    p.add_argument("--preference", help="'median', 'min', or a number")
    p.add_argument("--normalization", choices=("minmax", "zscore"))
    p.add_argument("--output-dir")


def _config_from_args(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            values.update(json.load(fh))
    overrides = {
        "dataset_path": args.dataset,
        "algorithm": args.algorithm,
        "setting": args.setting,
        "steps": args.steps,
        "first_n": args.first_n,
        "step_n": args.step_n,
        "q": args.q,
        "th_gamma": args.th_gamma,
        "damping": args.damping,
        "max_iterations": args.max_iterations,
        "convergence_window": args.convergence_window,
        "normalization": args.normalization,
        "output_dir": args.output_dir,
    }
    if args.seeds:
        overrides["seeds"] = args.seeds
    elif args.n_seeds:
        overrides["seeds"] = list(range(args.n_seeds))
    if args.preference is not None:
        try:
            overrides["preference"] = float(args.preference)
        except ValueError:
            overrides["preference"] = args.preference
    values.update({k: v for k, v in overrides.items() if v is not None})
    if values.get("th_gamma") in ("inf", "infinity"):
        values["th_gamma"] = float("inf")
    if not values.get("dataset_path"):
        raise SystemExit("a dataset path is required (--dataset or config file)")
    return ExperimentConfig(**values)


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    records, events = run_experiment(config)
    medians = aggregate_median(records)
    paths = export(records, medians, events, config.output_dir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _cmd_aggregate(args) -> int:
    records = []
    with open(args.records, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(StepRecord(
                seed=int(row["seed"]), step=int(row["step"]),
                pur=float(row["pur"]), nmi=float(row["nmi"]),
                nc=int(row["nc"]), ni=int(row["ni"]),
                ct=0.0, mu=float(row["mu"]),
            ))
    medians = aggregate_median(records, skip_step_zero=not args.keep_step_zero)
    writer = csv.writer(sys.stdout)
    writer.writerow(["step"] + list(METRIC_COLUMNS))
    for row in medians:
        writer.writerow([row["step"]] + [row[m] for m in METRIC_COLUMNS])
    return 0


def _cmd_validate_schedule(args) -> int:
    ds = load_csv(args.dataset)
    schedule, assignment, q = load_schedule(args.schedule)
    q = args.q if args.q is not None else (q or 0)
    violations = validate_schedule(schedule, ds.gold, assignment, q)
    if violations:
        for v in violations:
            print(v)
        return 1
    print(f"schedule OK ({schedule.steps} steps, q={q})")
    return 0


def _cmd_bench(args) -> int:
    impls = _kernels.backend_implementations()
    rng = np.random.default_rng(args.seed)
    X = rng.standard_normal((args.size, 2))
    S = -np.linalg.norm(X[:, None] - X[None, :], axis=-1)
    results = {}
    for name, (resp, avail) in sorted(impls.items()):
        R = np.zeros_like(S)
        A = np.zeros_like(S)
        resp(S, R, A, 0.9)  # trigger compilation before timing
        avail(R, A, 0.9)
        started = time.perf_counter()
        for _ in range(args.iterations):
            R = resp(S, R, A, 0.9)
            A = avail(R, A, 0.9)
        results[name] = time.perf_counter() - started
    print(f"active backend: {_kernels.BACKEND}")
    print(f"n={args.size}, {args.iterations} iterations")
    for name, elapsed in sorted(results.items()):
        print(f"  {name:6s} {elapsed:8.3f} s  "
              f"({elapsed / args.iterations * 1e3:7.2f} ms/iter)")
    if len(results) == 2:
        print(f"  speedup numba vs numpy: {results['numpy'] / results['numba']:.2f}x")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="appcluster")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(sub)

    p = sub.add_parser("aggregate", help="medians from an existing records.csv")
    p.add_argument("records")
    p.add_argument("--keep-step-zero", action="store_true")

    p = sub.add_parser("validate-schedule", help="audit a serialized schedule")
    p.add_argument("schedule")
    p.add_argument("--dataset", required=True)
    p.add_argument("--q", type=int)

    p = sub.add_parser("bench", help="compare message-kernel backends")
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    handler = {
        "run": _cmd_run,
        "aggregate": _cmd_aggregate,
        "validate-schedule": _cmd_validate_schedule,
        "bench": _cmd_bench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    raise SystemExit(main())
