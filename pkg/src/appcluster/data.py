"""Dataset ingestion, cumulative normalization, category subsetting and
arrival-schedule generation for the uniform and variable incremental
protocols.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

SCHEMAS = ("growing", "shrinking", "stable")


@dataclass
class Dataset:
    objects: np.ndarray
    gold: np.ndarray  # integer category id per object
    name: str = ""
    categories: List[str] = field(default_factory=list)

    @property
    def n_objects(self) -> int:
        return self.objects.shape[0]

    @property
    def n_categories(self) -> int:
        return len(np.unique(self.gold))


@dataclass
class ArrivalSchedule:
    batches: List[List[int]]

    @property
    def steps(self) -> int:
        return len(self.batches)


class ScheduleGenerationError(RuntimeError):
    pass


def load_csv(path, name: Optional[str] = None, has_header: bool = False,
             schema_path=None) -> Dataset:
    """Parse a CSV of numeric feature columns with a trailing category column.

    A sidecar schema file (``<path>.schema.json`` by default, JSON with a
    ``categorical`` list of 0-based feature column indices) declares the
    columns to one-hot encode.
    """
    path = Path(path)
    if schema_path is None:
        candidate = path.with_suffix(path.suffix + ".schema.json")
        schema_path = candidate if candidate.exists() else None
    categorical = set()
    if schema_path is not None:
        with open(schema_path, "r", encoding="utf-8") as fh:
            categorical = set(json.load(fh).get("categorical", []))

    rows, labels = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if has_header and lineno == 1:
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise ValueError(f"row {lineno}: need >=1 feature column plus a label")
            elif len(row) != width:
                raise ValueError(f"row {lineno}: expected {width} columns, got {len(row)}")
            rows.append([cell.strip() for cell in row[:-1]])
            labels.append(row[-1].strip())
    if not rows:
        raise ValueError(f"{path}: no data rows")

    n_features = len(rows[0])
    columns = []
    for col in range(n_features):
        raw = [r[col] for r in rows]
        if col in categorical:
            values = sorted(set(raw))
            for v in values:
                columns.append(np.array([1.0 if x == v else 0.0 for x in raw]))
        else:
            try:
                columns.append(np.array([float(x) for x in raw]))
            except ValueError:
                bad = next(i for i, x in enumerate(raw) if not _is_float(x))
                raise ValueError(
                    f"row {bad + 1}: non-numeric value {raw[bad]!r} in feature column {col}"
                ) from None
    objects = np.column_stack(columns)
    categories = sorted(set(labels))
    index = {c: i for i, c in enumerate(categories)}
    gold = np.array([index[l] for l in labels], dtype=int)
    return Dataset(objects, gold, name or path.stem, categories)


def _is_float(x: str) -> bool:
    try:
        float(x)
        return True
    except ValueError:
        return False


def subset_top_categories(ds: Dataset, top_k: int, total_n: Optional[int] = None,
                          rng=None) -> Dataset:
    """Keep the top_k most populous categories, then sample total_n objects
    uniformly without replacement (all of them when total_n is None)."""
    cats, counts = np.unique(ds.gold, return_counts=True)
    if top_k > cats.size:
        raise ValueError(f"dataset has {cats.size} categories, asked for top {top_k}")
    order = np.lexsort((cats, -counts))
    keep = set(cats[order[:top_k]].tolist())
    idx = np.flatnonzero(np.isin(ds.gold, list(keep)))
    if total_n is not None:
        if total_n > idx.size:
            raise ValueError(f"cannot sample {total_n} from {idx.size} objects")
        rng = np.random.default_rng(rng)
        idx = np.sort(rng.choice(idx, size=total_n, replace=False))
    names = [ds.categories[c] for c in sorted(keep)] if ds.categories else []
    remap = {c: i for i, c in enumerate(sorted(keep))}
    gold = np.array([remap[g] for g in ds.gold[idx]], dtype=int)
    return Dataset(ds.objects[idx], gold, ds.name, names)


def normalize_cumulative(objects, method: str = "minmax") -> np.ndarray:
    """Per-feature scaling over exactly the objects available now.

    minmax maps each feature to [0,1] (constant features to 0); zscore
    standardizes (constant features to 0).
    """
    X = np.atleast_2d(np.asarray(objects, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("no objects to normalize")
    if method == "minmax":
        lo = X.min(axis=0)
        span = X.max(axis=0) - lo
        span[span == 0.0] = 1.0
        return (X - lo) / span
    if method == "zscore":
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0.0] = 1.0
        return (X - mu) / sd
    raise ValueError(f"unknown normalization method: {method!r}")


def uniform_schedule(n_objects: int, first_n: int, step_n: int, steps: int,
                     rng) -> ArrivalSchedule:
    """Category-agnostic batches: shuffle, take first_n, then step_n per step."""
    need = first_n + (steps - 1) * step_n
    if need > n_objects:
        raise ValueError(f"schedule needs {need} objects, dataset has {n_objects}")
    rng = np.random.default_rng(rng)
    order = rng.permutation(n_objects)
    batches = [order[:first_n].tolist()]
    pos = first_n
    for _ in range(steps - 1):
        batches.append(order[pos:pos + step_n].tolist())
        pos += step_n
    return ArrivalSchedule(batches)


def default_q(ds: Dataset) -> int:
    """Minimum per-category batch size: 10% of the dataset size divided by
    the category count, rounded half-up."""
    return int(math.floor(0.10 * ds.n_objects / ds.n_categories + 0.5))


def _ramp_counts(n: int, window: int, ascending: bool, minimum: int):
    """Arithmetic ramp over the window exhausting n objects, floor-rounded
    with the remainder pushed to the large end. None when infeasible."""
    weights = list(range(1, window + 1))
    total = sum(weights)
    counts = [n * w // total for w in weights]
    counts[-1] += n - sum(counts)
    if counts[0] < max(minimum, 1):
        return None
    if window > 1 and any(b <= a for a, b in zip(counts, counts[1:])):
        return None
    return counts if ascending else counts[::-1]


def _category_counts(n: int, schema: str, steps: int, q: int, rng):
    minimum = max(q, 1)
    if schema == "stable":
        base, rem = divmod(n, steps)
        counts = [base + (1 if s < rem else 0) for s in range(steps)]
        if any(0 < c < minimum for c in counts):
            return None
        return counts
    feasible = []
    for window in range(1, steps + 1):
        if _ramp_counts(n, window, schema == "growing", minimum) is not None:
            feasible.append(window)
    if not feasible:
        return None
    window = int(rng.choice(feasible))
    ramp = _ramp_counts(n, window, schema == "growing", minimum)
    pad = [0] * (steps - window)
    # growing windows end at the last step; shrinking start at the first
    return pad + ramp if schema == "growing" else ramp + pad


def variable_schedule(ds: Dataset, q: Optional[int] = None, steps: int = 6,
                      rng=None, max_retries: int = 200):
    """Per-category growing/shrinking/stable arrival schedule.

    Every active (category, step) pair contributes at least q objects
    (q=0 disables the minimum, permitting single-object arrivals) and
    every step draws from at least two categories; generation retries
    with fresh schema draws until the constraints hold.

    Returns (ArrivalSchedule, {category id: schema name}).
    """
    rng = np.random.default_rng(rng)
    if q is None:
        q = default_q(ds)
    cats, counts = np.unique(ds.gold, return_counts=True)
    if q >= 1 and (counts < 2 * q).any():
        raise ScheduleGenerationError(
            f"every category needs >= {2 * q} objects for q={q}"
        )
    pools = {int(c): np.flatnonzero(ds.gold == c) for c in cats}

    for _ in range(max_retries):
        assignment = {int(c): SCHEMAS[int(rng.integers(3))] for c in cats}
        per_cat = {}
        ok = True
        for c in cats:
            c = int(c)
            cc = _category_counts(len(pools[c]), assignment[c], steps, q, rng)
            if cc is None:
                ok = False
                break
            per_cat[c] = cc
        if not ok:
            continue
        active = [sum(1 for c in per_cat if per_cat[c][s] > 0) for s in range(steps)]
        if min(active) < 2:
            continue
        batches = [[] for _ in range(steps)]
        for c in per_cat:
            shuffled = rng.permutation(pools[c])
            pos = 0
            for s, k in enumerate(per_cat[c]):
                batches[s].extend(int(i) for i in shuffled[pos:pos + k])
                pos += k
        return ArrivalSchedule(batches), assignment
    raise ScheduleGenerationError(
        f"no valid schedule for q={q}, steps={steps} after {max_retries} retries"
    )


def validate_schedule(schedule: ArrivalSchedule, gold, assignment: Dict[int, str],
                      q: int) -> List[str]:
    """Independent audit of a variable schedule; returns a list of violations."""
    gold = np.asarray(gold)
    violations = []
    seen = set()
    for s, batch in enumerate(schedule.batches):
        for i in batch:
            if i in seen:
                violations.append(f"step {s}: index {i} repeated")
            if not (0 <= i < gold.size):
                violations.append(f"step {s}: index {i} out of range")
            seen.add(i)
    if not schedule.batches or not schedule.batches[0]:
        violations.append("batch 0 empty")
    for s, batch in enumerate(schedule.batches):
        cats = set(int(gold[i]) for i in batch)
        if len(cats) < 2:
            violations.append(f"step {s}: fewer than two categories")
    for c, schema in assignment.items():
        series = [sum(1 for i in batch if gold[i] == c) for batch in schedule.batches]
        active = [s for s, k in enumerate(series) if k > 0]
        if not active:
            violations.append(f"category {c}: never arrives")
            continue
        if q >= 1:
            for s in active:
                if series[s] < q:
                    violations.append(f"category {c} step {s}: {series[s]} < q={q}")
        if active != list(range(active[0], active[-1] + 1)):
            violations.append(f"category {c}: non-contiguous window {active}")
        window = [series[s] for s in active]
        if schema == "growing":
            if any(b <= a for a, b in zip(window, window[1:])):
                violations.append(f"category {c}: not strictly ascending {window}")
            if active[-1] != len(series) - 1:
                violations.append(f"category {c}: growing window ends early")
        elif schema == "shrinking":
            if any(b >= a for a, b in zip(window, window[1:])):
                violations.append(f"category {c}: not strictly descending {window}")
            if active[0] != 0:
                violations.append(f"category {c}: shrinking window starts late")
    return violations


def save_schedule(path, schedule: ArrivalSchedule, seed=None,
                  assignment: Optional[Dict[int, str]] = None, q: Optional[int] = None,
                  name: str = "") -> None:
    """Serialize a schedule for exact replay across algorithms."""
    payload = {
        "name": name,
        "seed": seed,
        "q": q,
        "batches": schedule.batches,
        "schema": {str(k): v for k, v in (assignment or {}).items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def load_schedule(path):
    """Returns (ArrivalSchedule, assignment dict, q)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    schedule = ArrivalSchedule([list(map(int, b)) for b in payload["batches"]])
    assignment = {int(k): v for k, v in payload.get("schema", {}).items()}
    return schedule, assignment, payload.get("q")
