"""Affinity propagation engine: damped message passing, convergence
detection on the decoded exemplar set, and assignment extraction.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._kernels import availability_update, responsibility_update


@dataclass
class APConfig:
    """Engine hyperparameters.

    damping must lie in [0.5, 1); convergence is declared after
    ``convergence_window`` consecutive iterations with an unchanged
    decoded exemplar set. ``preference`` is 'median', 'min' or a fixed
    number; ``squared`` switches the metric to negative squared
    euclidean. ``jitter_seed``, when set, adds a tiny seeded perturbation
    to the similarities (off by default; exact ties resolve by index).
    """

    max_iterations: int = 200
    damping: float = 0.9
    convergence_window: int = 15
    preference: object = "median"
    squared: bool = False
    jitter_seed: Optional[int] = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not (0.5 <= self.damping < 1.0):
            raise ValueError("damping must be in [0.5, 1)")
        if not (0 < self.convergence_window < self.max_iterations):
            raise ValueError("convergence_window must be in (0, max_iterations)")


@dataclass
class MessageState:
    """Responsibility and availability matrices."""

    R: np.ndarray
    A: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "MessageState":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    def copy(self) -> "MessageState":
        return MessageState(self.R.copy(), self.A.copy())


@dataclass
class ClusteringResult:
    labels: np.ndarray = field(repr=False)  # per-object exemplar index
    exemplars: list = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False

    @property
    def n_clusters(self) -> int:
        return len(self.exemplars)


def update_responsibilities(S, state: MessageState, damping: float) -> MessageState:
    """One damped responsibility sweep; availabilities pass through."""
    if S.shape != state.R.shape:
        raise ValueError("similarity/message dimension mismatch")
    R = responsibility_update(S, state.R, state.A, damping)
    return MessageState(R, state.A.copy())


def update_availabilities(state: MessageState, damping: float) -> MessageState:
    """One damped availability sweep from the current responsibilities."""
    A = availability_update(state.R, state.A, damping)
    return MessageState(state.R.copy(), A)


def _decode(S, R, A):
    """(labels, exemplars, valid): valid is False when no index selects
    itself and the strongest self-evidence index had to be promoted."""
    n = S.shape[0]
    E = A + R
    choice = np.argmax(E, axis=1)
    exemplars = np.flatnonzero(choice == np.arange(n))
    valid = exemplars.size > 0
    if not valid:
        exemplars = np.array([int(np.argmax(np.diag(E)))])
    labels = exemplars[np.argmax(S[:, exemplars], axis=1)]
    labels[exemplars] = exemplars
    return labels, [int(k) for k in exemplars], valid


def extract_assignment(S, state: MessageState):
    """Decode (labels, exemplars) from accumulated messages.

    Candidate exemplar of i is argmax_k a(i,k)+r(i,k); self-selecting
    indices form the exemplar set; everyone else joins the most similar
    exemplar. An empty set promotes the strongest self-evidence index.
    """
    labels, exemplars, _ = _decode(S, state.R, state.A)
    return labels, exemplars


def run_message_passing(S, config: APConfig, state: Optional[MessageState] = None):
    """Run the damped message loop, warm-started from ``state`` if given.

    Returns (ClusteringResult, final MessageState).
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if S.ndim != 2 or S.shape[1] != n:
        raise ValueError("similarity matrix must be square")
    if n == 1:
        # Eq-level updates are undefined for a singleton; trivial result.
        result = ClusteringResult(np.array([0]), [0], 0, True)
        return result, MessageState.zeros(1)
    if config.jitter_seed is not None:
        rng = np.random.default_rng(config.jitter_seed)
        S = S + 1e-12 * np.abs(S).max() * rng.standard_normal(S.shape)
    if state is None:
        state = MessageState.zeros(n)
    elif state.R.shape != S.shape:
        raise ValueError("warm-start state dimension mismatch")

    R, A = state.R.copy(), state.A.copy()
    d = config.damping
    prev_exemplars = None
    streak = 0
    converged = False
    labels, exemplars = np.zeros(n, dtype=int), [0]
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        R = responsibility_update(S, R, A, d)
        A = availability_update(R, A, d)
        labels, exemplars, valid = _decode(S, R, A)
        # A fallback-promoted exemplar is not a real fixed point; never
        # declare convergence on it.
        key = tuple(exemplars) if valid else None
        if key is not None and key == prev_exemplars:
            streak += 1
        else:
            prev_exemplars = key
            streak = 0
        if streak >= config.convergence_window and key is not None:
            converged = True
            break
    result = ClusteringResult(labels, exemplars, iterations, converged)
    return result, MessageState(R, A)


def run_ap(S, config: Optional[APConfig] = None) -> ClusteringResult:
    """Cluster a similarity matrix from cold-start messages."""
    result, _ = run_message_passing(S, config or APConfig())
    return result
