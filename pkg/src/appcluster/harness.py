"""Benchmark orchestration: run AP / IAPNA / APP over seeded arrival
schedules, record per-step metrics, aggregate per-step medians across
seeds, and export results.

records.csv holds the deterministic per-seed metrics; wall-clock timings
go to a separate timings.csv so reruns with the same seeds are
byte-identical on records.csv and events.jsonl.
"""

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .ap import APConfig, run_ap
from .geometry import build_similarity_matrix
from .app import AppState, app_step
from .data import (
    ArrivalSchedule,
    Dataset,
    default_q,
    load_csv,
    normalize_cumulative,
    uniform_schedule,
    variable_schedule,
)
from .iapna import IAPNAState, iapna_step
from .metrics import cluster_count, nmi, purity

ALGORITHMS = ("ap", "iapna", "app")
SETTINGS = ("uniform", "variable", "ablation")

OUTPUT_DIR_ENV = "APPCLUSTER_OUTPUT_DIR"


@dataclass
class ExperimentConfig:
    dataset_path: Optional[str] = None
    algorithm: str = "app"
    setting: str = "uniform"
    seeds: Sequence[int] = (0,)
    steps: int = 6
    first_n: Optional[int] = None
    step_n: Optional[int] = None
    q: Optional[int] = None
    th_gamma: float = 1.0
    damping: float = 0.9
    max_iterations: int = 200
    convergence_window: int = 15
    preference: object = "median"
    normalization: str = "minmax"
    output_dir: str = "results"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}")
        if not self.seeds:
            raise ValueError("seed list must be non-empty")

    def ap_config(self) -> APConfig:
        return APConfig(
            max_iterations=self.max_iterations,
            damping=self.damping,
            convergence_window=self.convergence_window,
            preference=self.preference,
        )


@dataclass
class StepRecord:
    seed: int
    step: int
    pur: float
    nmi: float
    nc: int
    ni: int
    ct: float
    mu: float
    labels: Dict[int, int] = field(default_factory=dict, repr=False)


def matrix_footprint_mb(n: int) -> float:
    """Deterministic memory proxy: similarity plus both message matrices,
    8 bytes per entry, in MiB."""
    return 3 * n * n * 8 / 1024**2


def make_schedule(ds: Dataset, config: ExperimentConfig, seed: int):
    """The schedule a given seed feeds to every algorithm."""
    rng = np.random.default_rng(seed)
    if config.setting == "uniform":
        if config.first_n is None or config.step_n is None:
            raise ValueError("uniform setting requires first_n and step_n")
        return uniform_schedule(ds.n_objects, config.first_n, config.step_n,
                                config.steps, rng), None
    q = 0 if config.setting == "ablation" else (
        config.q if config.q is not None else default_q(ds))
    schedule, assignment = variable_schedule(ds, q=q, steps=config.steps, rng=rng)
    return schedule, assignment


def _run_seed(ds: Dataset, config: ExperimentConfig, seed: int,
              schedule: ArrivalSchedule, events_sink: list) -> List[StepRecord]:
    ap_cfg = config.ap_config()
    norm = config.normalization
    records = []
    arrived: List[int] = []
    iapna_state = IAPNAState()
    app_state = AppState()

    for step, batch in enumerate(schedule.batches):
        batch = list(batch)
        arrived.extend(batch)
        started = time.perf_counter()
        if config.algorithm == "ap":
            working = normalize_cumulative(ds.objects[arrived], norm)
            S = build_similarity_matrix(working, ap_cfg.preference, ap_cfg.squared)
            result = run_ap(S, ap_cfg)
            elapsed = time.perf_counter() - started
            ids, predicted = np.asarray(arrived), result.labels
            ni, dim = result.iterations_run, len(arrived)
        elif config.algorithm == "iapna":
            _, result = iapna_step(
                iapna_state, ds.objects[batch], ap_cfg,
                normalizer=lambda X: normalize_cumulative(X, norm),
            )
            elapsed = time.perf_counter() - started
            ids, predicted = np.asarray(arrived), result.labels
            ni, dim = result.iterations_run, len(arrived)
        else:
            before = len(app_state.history)
            app_step(
                app_state, ds.objects[batch], ap_cfg,
                th_gamma=config.th_gamma, object_ids=batch,
                normalizer=lambda X: normalize_cumulative(X, norm),
            )
            elapsed = time.perf_counter() - started
            ids, predicted = app_state.labels()
            ni, dim = app_state.last_iterations, app_state.last_matrix_dim
            for event in app_state.history[before:]:
                events_sink.append((seed, event))
        gold = ds.gold[ids]
        records.append(StepRecord(
            seed=seed,
            step=step,
            pur=purity(predicted, gold),
            nmi=nmi(predicted, gold),
            nc=cluster_count(predicted),
            ni=max(1, ni),
            ct=elapsed,
            mu=matrix_footprint_mb(dim),
            labels={int(i): int(l) for i, l in zip(ids, predicted)},
        ))
    return records


def run_experiment(config: ExperimentConfig, dataset: Optional[Dataset] = None):
    """Execute the configured experiment over all seeds.

    Returns (records, events) where events is a list of
    (seed, StratificationEvent) pairs (empty for AP / IAPNA). A
    schedule-generation failure aborts that seed only.
    """
    ds = dataset if dataset is not None else load_csv(config.dataset_path)
    records: List[StepRecord] = []
    events: list = []
    failures = []
    for seed in config.seeds:
        try:
            schedule, _ = make_schedule(ds, config, seed)
        except Exception as exc:  # schedule generation is per-seed
            failures.append((seed, str(exc)))
            continue
        records.extend(_run_seed(ds, config, seed, schedule, events))
    if failures and not records:
        raise RuntimeError(f"all seeds failed schedule generation: {failures}")
    return records, events


METRIC_COLUMNS = ("pur", "nmi", "nc", "ni", "ct", "mu")


def aggregate_median(records: List[StepRecord], skip_step_zero: bool = True):
    """Per-step median over seeds for each metric.

    Step-0 rows are computed but excluded by default (the three
    algorithms coincide there).
    """
    if not records:
        raise ValueError("no records to aggregate")
    steps = sorted({r.step for r in records})
    if skip_step_zero:
        steps = [s for s in steps if s != 0]
    rows = []
    for step in steps:
        group = [r for r in records if r.step == step]
        row = {"step": step}
        for metric in METRIC_COLUMNS:
            row[metric] = float(np.median([getattr(r, metric) for r in group]))
        rows.append(row)
    return rows


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def export(records: List[StepRecord], medians, events, outdir) -> Dict[str, Path]:
    """Write records.csv, timings.csv, medians.csv, labels.csv,
    events.jsonl and plot_data.csv; returns the written paths."""
    outdir = Path(os.environ.get(OUTPUT_DIR_ENV) or outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["records"] = outdir / "records.csv"
    with open(paths["records"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "step", "pur", "nmi", "nc", "ni", "mu"])
        for r in sorted(records, key=lambda r: (r.seed, r.step)):
            writer.writerow([r.seed, r.step, _fmt(r.pur), _fmt(r.nmi), r.nc, r.ni,
                             _fmt(r.mu)])

    paths["timings"] = outdir / "timings.csv"
    with open(paths["timings"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "step", "ct_seconds"])
        for r in sorted(records, key=lambda r: (r.seed, r.step)):
            writer.writerow([r.seed, r.step, _fmt(r.ct)])

    paths["labels"] = outdir / "labels.csv"
    with open(paths["labels"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "step", "object_id", "label"])
        for r in sorted(records, key=lambda r: (r.seed, r.step)):
            for oid in sorted(r.labels):
                writer.writerow([r.seed, r.step, oid, r.labels[oid]])

    paths["medians"] = outdir / "medians.csv"
    with open(paths["medians"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step"] + list(METRIC_COLUMNS))
        for row in medians:
            writer.writerow([row["step"]] + [_fmt(row[m]) for m in METRIC_COLUMNS])

    paths["events"] = outdir / "events.jsonl"
    with open(paths["events"], "w", encoding="utf-8") as fh:
        for seed, event in events:
            record = {"seed": seed}
            record.update(event.to_dict())
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    paths["plot_data"] = outdir / "plot_data.csv"
    with open(paths["plot_data"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "step", "value"])
        for metric in METRIC_COLUMNS:
            for row in medians:
                writer.writerow([metric, row["step"], _fmt(row[metric])])
    return paths
