"""Vector similarity and similarity-matrix construction.

Similarity between feature vectors defaults to the negative euclidean
distance. The diagonal of a similarity matrix carries the preference,
set by policy to the median (default) or minimum of the off-diagonal
entries, or to a fixed value.
"""

import numpy as np
from scipy.spatial.distance import cdist


def _check_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")


def negative_euclidean(a, b) -> float:
    """Negative euclidean distance between two equal-dimension vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    _check_finite(a, "a")
    _check_finite(b, "b")
    return -float(np.linalg.norm(a - b))


def pairwise_similarities(X, squared: bool = False) -> np.ndarray:
    """Dense n x n matrix of negative (optionally squared) euclidean distances."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_finite(X, "X")
    D = cdist(X, X, metric="euclidean")
    if squared:
        D = D * D
    return -D


def preference_value(S: np.ndarray, policy) -> float:
    """Preference under a policy: 'median', 'min'/'minimum', or a fixed number.

    Median and minimum are taken over all n(n-1) off-diagonal entries;
    an even count averages the two central values. For a 1x1 matrix both
    data-driven policies yield 0 (there are no off-diagonal entries).
    """
    if isinstance(policy, (int, float)) and not isinstance(policy, bool):
        return float(policy)
    n = S.shape[0]
    if n == 1:
        return 0.0
    off = S[~np.eye(n, dtype=bool)]
    if policy == "median":
        return float(np.median(off))
    if policy in ("min", "minimum"):
        return float(off.min())
    raise ValueError(f"unknown preference policy: {policy!r}")


def build_similarity_matrix(X, preference="median", squared: bool = False) -> np.ndarray:
    """Similarity matrix over X with the preference on the diagonal."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 1 or X.size == 0:
        raise ValueError("X must contain at least one vector")
    S = pairwise_similarities(X, squared=squared)
    p = preference_value(S, preference)
    np.fill_diagonal(S, p)
    return S
