"""Incremental affinity propagation with nearest-neighbor message
hand-off: converged messages survive across time-steps and new arrivals
inherit the message rows/columns of their nearest pre-existing object
before the loop resumes on the full accumulated set.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ap import APConfig, ClusteringResult, MessageState, run_message_passing
from .geometry import build_similarity_matrix


@dataclass
class IAPNAState:
    """Accumulated objects plus the carried-over message matrices."""

    objects: Optional[np.ndarray] = None
    messages: Optional[MessageState] = None
    last_result: Optional[ClusteringResult] = None

    @property
    def n_objects(self) -> int:
        return 0 if self.objects is None else self.objects.shape[0]


def nearest_neighbor(x, existing) -> int:
    """Index of the closest existing vector; ties go to the lowest index."""
    existing = np.atleast_2d(np.asarray(existing, dtype=float))
    if existing.shape[0] == 0:
        raise ValueError("existing must be non-empty")
    x = np.asarray(x, dtype=float)
    d2 = ((existing - x) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def extend_messages(messages: MessageState, neighbors) -> MessageState:
    """Grow the message matrices for len(neighbors) new objects.

    New object j with nearest pre-existing neighbor q copies q's message
    rows/columns against every old object; the j<->q pair and j's
    self-messages take q's self-message values; a new/new pair copies the
    neighbor-pair messages (zero when both map to the same neighbor).
    """
    n_old = messages.R.shape[0]
    m = len(neighbors)
    n = n_old + m
    R = np.zeros((n, n))
    A = np.zeros((n, n))
    R[:n_old, :n_old] = messages.R
    A[:n_old, :n_old] = messages.A
    for j, q in enumerate(neighbors):
        J = n_old + j
        R[J, :n_old] = messages.R[q, :]
        A[J, :n_old] = messages.A[q, :]
        R[:n_old, J] = messages.R[:, q]
        A[:n_old, J] = messages.A[:, q]
        R[J, q] = messages.R[q, q]
        A[J, q] = messages.A[q, q]
        R[q, J] = messages.R[q, q]
        A[q, J] = messages.A[q, q]
        R[J, J] = messages.R[q, q]
        A[J, J] = messages.A[q, q]
    for j, qj in enumerate(neighbors):
        for j2, qj2 in enumerate(neighbors):
            if j == j2:
                continue
            J, J2 = n_old + j, n_old + j2
            if qj == qj2:
                R[J, J2] = 0.0
                A[J, J2] = 0.0
            else:
                R[J, J2] = messages.R[qj, qj2]
                A[J, J2] = messages.A[qj, qj2]
    return MessageState(R, A)


def iapna_step(
    state: IAPNAState,
    new_objects,
    config: Optional[APConfig] = None,
    normalizer: Optional[Callable[[np.ndarray], np.ndarray]] = None,
):
    """Absorb a batch and re-converge over the full accumulated set.

    ``normalizer``, when given, maps the raw accumulated object array to
    the working vectors for this step (re-applied cumulatively, so the
    similarity matrix and its preference are rebuilt per step). Returns
    (state, ClusteringResult); the state is updated in place.
    """
    config = config or APConfig()
    new_objects = np.atleast_2d(np.asarray(new_objects, dtype=float))
    if new_objects.shape[0] == 0:
        raise ValueError("new_objects must be non-empty")

    if state.n_objects == 0:
        state.objects = new_objects.copy()
        warm = None
    else:
        old_n = state.n_objects
        state.objects = np.vstack([state.objects, new_objects])
        working = normalizer(state.objects) if normalizer else state.objects
        neighbors = [
            nearest_neighbor(working[old_n + j], working[:old_n])
            for j in range(new_objects.shape[0])
        ]
        warm = extend_messages(state.messages, neighbors)

    working = normalizer(state.objects) if normalizer else state.objects
    S = build_similarity_matrix(working, config.preference, config.squared)
    result, messages = run_message_passing(S, config, state=warm)
    state.messages = messages
    state.last_result = result
    return state, result
