"""Message-update kernels.

Two interchangeable backends compute one damped responsibility or
availability sweep over dense n x n matrices:

* ``numba`` -- @njit loop kernels (default when numba imports cleanly)
* ``numpy`` -- vectorized fallback

Select explicitly with the environment variable ``APPCLUSTER_BACKEND``
set to ``numba`` or ``numpy`` before the package is imported. Both
backends implement identical arithmetic; ties in every argmax resolve
to the lowest index.
"""

import os

import numpy as np


def _responsibility_numpy(S, R, A, damping):
    n = S.shape[0]
    AS = A + S
    rows = np.arange(n)
    top = np.argmax(AS, axis=1)
    first = AS[rows, top]
    AS[rows, top] = -np.inf
    second = AS.max(axis=1)
    Rnew = S - first[:, None]
    Rnew[rows, top] = S[rows, top] - second
    return damping * R + (1.0 - damping) * Rnew


def _availability_numpy(R, A, damping):
    n = R.shape[0]
    rows = np.arange(n)
    Rp = np.maximum(R, 0.0)
    diag = R[rows, rows].copy()
    Rp[rows, rows] = diag
    colsum = Rp.sum(axis=0)
    Anew = np.minimum(0.0, colsum[None, :] - Rp)
    Anew[rows, rows] = colsum - diag
    return damping * A + (1.0 - damping) * Anew


def _responsibility_loops(S, R, A, damping):
    n = S.shape[0]
    out = np.empty_like(R)
    for i in range(n):
        best = -np.inf
        second = -np.inf
        best_k = -1
        for k in range(n):
            v = A[i, k] + S[i, k]
            if v > best:
                second = best
                best = v
                best_k = k
            elif v > second:
                second = v
        for k in range(n):
            competing = second if k == best_k else best
            out[i, k] = damping * R[i, k] + (1.0 - damping) * (S[i, k] - competing)
    return out


def _availability_loops(R, A, damping):
    n = R.shape[0]
    out = np.empty_like(A)
    for k in range(n):
        colsum = R[k, k]
        for i in range(n):
            if i != k and R[i, k] > 0.0:
                colsum += R[i, k]
        for i in range(n):
            if i == k:
                undamped = colsum - R[k, k]
            else:
                undamped = colsum - max(0.0, R[i, k])
                if undamped > 0.0:
                    undamped = 0.0
            out[i, k] = damping * A[i, k] + (1.0 - damping) * undamped
    return out


def _load_numba():
    from numba import njit

    return (
        njit(cache=True)(_responsibility_loops),
        njit(cache=True)(_availability_loops),
    )


_requested = os.environ.get("APPCLUSTER_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"APPCLUSTER_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    BACKEND = "numpy"
    responsibility_update = _responsibility_numpy
    availability_update = _availability_numpy
else:
    try:
        responsibility_update, availability_update = _load_numba()
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        BACKEND = "numpy"
        responsibility_update = _responsibility_numpy
        availability_update = _availability_numpy


def backend_implementations():
    """Return {name: (responsibility, availability)} for every usable backend.

    Used by the backend benchmark; independent of the active selection.
    """
    impls = {"numpy": (_responsibility_numpy, _availability_numpy)}
    try:
        impls["numba"] = _load_numba()
    except ImportError:
        pass
    return impls
