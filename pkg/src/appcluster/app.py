"""A-posteriori affinity propagation: prior clusters are consolidated
into centroids, clustered together with the new arrivals, and the
outcome is traced as creation / enrichment / merge / prune events.
Previously clustered objects never change cluster except through
whole-cluster merges, and clusters untouched for more than ``th_gamma``
steps are pruned together with their members.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .ap import APConfig, run_message_passing
from .geometry import build_similarity_matrix

EVENT_KINDS = ("creation", "enrichment", "merge", "prune")


@dataclass
class Cluster:
    id: int
    members: List[int]
    centroid: np.ndarray
    gamma: int  # last step the cluster was created/changed
    created_at: int


@dataclass
class StratificationEvent:
    time: int
    kind: str
    sources: List[int]
    target: Optional[int]
    new_members: int
    member_count: int

    def to_dict(self) -> dict:
        return {
            "time": self.time,
            "kind": self.kind,
            "sources": list(self.sources),
            "target": self.target,
            "new_members": self.new_members,
            "member_count": self.member_count,
        }


@dataclass
class AppState:
    """Live session state: current clusters, the retained-object store,
    and the full stratification history."""

    t: int = -1
    clusters: List[Cluster] = field(default_factory=list)
    objects: Dict[int, np.ndarray] = field(default_factory=dict)
    history: List[StratificationEvent] = field(default_factory=list)
    next_cluster_id: int = 0
    next_object_id: int = 0
    last_matrix_dim: int = 0
    last_iterations: int = 0

    def labels(self):
        """(object ids, cluster ids) over all currently retained objects."""
        ids, labs = [], []
        for c in self.clusters:
            ids.extend(c.members)
            labs.extend([c.id] * len(c.members))
        return np.asarray(ids), np.asarray(labs)


def _mean_vector(state: AppState, members) -> np.ndarray:
    return np.mean([state.objects[i] for i in members], axis=0)


def pack(clusters: List[Cluster]):
    """(cluster id, centroid) pairs, one per non-empty cluster."""
    for c in clusters:
        if not c.members:
            raise ValueError(f"cluster {c.id} has no members")
    return [(c.id, c.centroid) for c in clusters]


def split(labels, n_centroids: int):
    """Positionally split combined labels into centroid and new-object parts."""
    labels = np.asarray(labels)
    return labels[:n_centroids], labels[n_centroids:]


def unpack_and_update(centroid_labels, clusters: List[Cluster]) -> Dict[int, int]:
    """Map every prior object id to its centroid's temporary label."""
    if len(centroid_labels) != len(clusters):
        raise ValueError("one temporary label per centroid required")
    mapping = {}
    for lab, c in zip(centroid_labels, clusters):
        for obj in c.members:
            mapping[obj] = int(lab)
    return mapping


def _label_groups(clusters, centroid_labels, new_labels):
    """Group temporary labels into (centroid clusters, new-object slots),
    ordered by first appearance in the combined labeling."""
    groups = {}
    order = []
    for pos, lab in enumerate(list(centroid_labels) + list(new_labels)):
        lab = int(lab)
        if lab not in groups:
            groups[lab] = ([], [])
            order.append(lab)
        if pos < len(centroid_labels):
            groups[lab][0].append(clusters[pos])
        else:
            groups[lab][1].append(pos - len(centroid_labels))
    return [(lab, groups[lab][0], groups[lab][1]) for lab in order]


def classify_stratification(
    clusters: List[Cluster], centroid_labels, new_labels, time: int = 0
) -> List[StratificationEvent]:
    """Events implied by a step's temporary labeling.

    Per label: no centroid and >=1 new object is a creation; one centroid
    with >=1 new object is an enrichment (without new objects the cluster
    is simply unchanged); >=2 centroids merge regardless of new objects.
    """
    events = []
    ids = itertools.count(max((c.id for c in clusters), default=-1) + 1)
    for _, cents, news in _label_groups(clusters, centroid_labels, new_labels):
        total = sum(len(c.members) for c in cents) + len(news)
        if not cents:
            if news:
                events.append(
                    StratificationEvent(time, "creation", [], next(ids), len(news), total)
                )
        elif len(cents) == 1:
            if news:
                events.append(
                    StratificationEvent(
                        time, "enrichment", [cents[0].id], cents[0].id, len(news), total
                    )
                )
        else:
            events.append(
                StratificationEvent(
                    time, "merge", [c.id for c in cents], next(ids), len(news), total
                )
            )
    return events


def prune(state: AppState, th_gamma: float) -> AppState:
    """Drop clusters with t - gamma > th_gamma and forget their members."""
    survivors = []
    for c in state.clusters:
        if state.t - c.gamma > th_gamma:
            for obj in c.members:
                del state.objects[obj]
            state.history.append(
                StratificationEvent(state.t, "prune", [c.id], None, 0, len(c.members))
            )
        else:
            survivors.append(c)
    state.clusters = survivors
    return state


def app_step(
    state: AppState,
    X,
    config: Optional[APConfig] = None,
    th_gamma: float = math.inf,
    object_ids=None,
    normalizer: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> AppState:
    """Advance one time-step with a batch of new objects.

    With no live clusters the step is a plain AP run over X. Otherwise
    the prior clusters' centroids and X are clustered together, prior
    members are relabeled through their centroid, events are classified,
    and stale clusters are pruned. ``normalizer``, when given, maps the
    combined vector array (centroids first) to the working vectors the
    similarity matrix is built from. ``object_ids`` fixes the ids of the
    new objects (defaults to an internal counter).
    """
    config = config or APConfig()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("X must be non-empty")
    t = state.t + 1
    if object_ids is None:
        object_ids = list(range(state.next_object_id, state.next_object_id + X.shape[0]))
    elif len(object_ids) != X.shape[0]:
        raise ValueError("object_ids length must match X")
    object_ids = [int(i) for i in object_ids]
    state.next_object_id = max(state.next_object_id, max(object_ids) + 1)
    for oid, vec in zip(object_ids, X):
        state.objects[oid] = np.asarray(vec, dtype=float)

    if not state.clusters:
        working = normalizer(X) if normalizer else X
        S = build_similarity_matrix(working, config.preference, config.squared)
        result, _ = run_message_passing(S, config)
        state.last_matrix_dim = X.shape[0]
        state.last_iterations = result.iterations_run
        state.t = t
        for exemplar in result.exemplars:
            members = [object_ids[i] for i in np.flatnonzero(result.labels == exemplar)]
            cid = state.next_cluster_id
            state.next_cluster_id += 1
            state.clusters.append(
                Cluster(cid, members, _mean_vector(state, members), t, t)
            )
            state.history.append(
                StratificationEvent(t, "creation", [], cid, len(members), len(members))
            )
        return prune(state, th_gamma)

    centroids = np.asarray([cent for _, cent in pack(state.clusters)])
    combined = np.vstack([centroids, X])
    working = normalizer(combined) if normalizer else combined
    S = build_similarity_matrix(working, config.preference, config.squared)
    result, _ = run_message_passing(S, config)
    state.last_matrix_dim = combined.shape[0]
    state.last_iterations = result.iterations_run
    mu_labels, new_labels = split(result.labels, len(state.clusters))

    state.t = t
    new_clusters = []
    for _, cents, news in _label_groups(state.clusters, mu_labels, new_labels):
        new_ids = [object_ids[j] for j in news]
        if not cents:
            if not new_ids:
                continue
            cid = state.next_cluster_id
            state.next_cluster_id += 1
            cluster = Cluster(cid, list(new_ids), _mean_vector(state, new_ids), t, t)
            state.history.append(
                StratificationEvent(t, "creation", [], cid, len(new_ids), len(cluster.members))
            )
        elif len(cents) == 1:
            prior = cents[0]
            if new_ids:
                members = prior.members + new_ids
                cluster = Cluster(
                    prior.id, members, _mean_vector(state, members), t, prior.created_at
                )
                state.history.append(
                    StratificationEvent(
                        t, "enrichment", [prior.id], prior.id, len(new_ids), len(members)
                    )
                )
            else:
                cluster = prior  # unchanged: gamma untouched
        else:
            members = [m for c in cents for m in c.members] + new_ids
            cid = state.next_cluster_id
            state.next_cluster_id += 1
            cluster = Cluster(cid, members, _mean_vector(state, members), t, t)
            state.history.append(
                StratificationEvent(
                    t, "merge", [c.id for c in cents], cid, len(new_ids), len(members)
                )
            )
        new_clusters.append(cluster)
    state.clusters = new_clusters
    return prune(state, th_gamma)


def write_events_jsonl(events, path, extra: Optional[dict] = None) -> None:
    """One JSON object per line, one line per stratification event."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            record = dict(extra or {})
            record.update(e.to_dict())
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def save_snapshot(state: AppState, path) -> None:
    """Serialize the session state as JSON for resume/inspection."""
    payload = {
        "t": state.t,
        "next_cluster_id": state.next_cluster_id,
        "next_object_id": state.next_object_id,
        "clusters": [
            {
                "id": c.id,
                "members": list(c.members),
                "centroid": c.centroid.tolist(),
                "gamma": c.gamma,
                "created_at": c.created_at,
            }
            for c in state.clusters
        ],
        "objects": {str(k): v.tolist() for k, v in state.objects.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def load_snapshot(path) -> AppState:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    state = AppState(
        t=payload["t"],
        next_cluster_id=payload["next_cluster_id"],
        next_object_id=payload["next_object_id"],
    )
    state.objects = {int(k): np.asarray(v, dtype=float) for k, v in payload["objects"].items()}
    state.clusters = [
        Cluster(
            c["id"],
            [int(m) for m in c["members"]],
            np.asarray(c["centroid"], dtype=float),
            c["gamma"],
            c["created_at"],
        )
        for c in payload["clusters"]
    ]
    return state
