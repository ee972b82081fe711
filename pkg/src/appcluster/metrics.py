"""Clustering-quality metrics: purity, normalized mutual information,
cluster count.
"""

import numpy as np


def _contingency(predicted, gold):
    pred = np.asarray(predicted)
    true = np.asarray(gold)
    if pred.shape != true.shape or pred.ndim != 1:
        raise ValueError("predicted and gold must be equal-length 1-D sequences")
    if pred.size == 0:
        raise ValueError("empty partition")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(true, return_inverse=True)
    table = np.zeros((pi.max() + 1, ti.max() + 1), dtype=np.int64)
    np.add.at(table, (pi, ti), 1)
    return table


def purity(predicted, gold) -> float:
    """Fraction of objects matching their cluster's majority category."""
    table = _contingency(predicted, gold)
    return float(table.max(axis=1).sum() / table.sum())


def nmi(predicted, gold) -> float:
    """Mutual information normalized by the mean of the two entropies.

    Uses natural logs (the base cancels). Returns 1 when both partitions
    are trivial (both entropies zero) and 0 when the mutual information
    vanishes, with the 0*log(0)=0 convention throughout.
    """
    table = _contingency(predicted, gold)
    n = table.sum()
    pij = table / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)

    def entropy(p):
        p = p[p > 0]
        return float(-(p * np.log(p)).sum())

    h_pred = entropy(pi)
    h_true = entropy(pj)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    nz = pij > 0
    mi = float((pij[nz] * (np.log(pij[nz]) - np.log(np.outer(pi, pj)[nz]))).sum())
    if mi <= 0.0:
        return 0.0
    return mi / ((h_pred + h_true) / 2.0)


def cluster_count(predicted) -> int:
    """Number of distinct cluster ids."""
    predicted = np.asarray(predicted)
    if predicted.size == 0:
        raise ValueError("empty partition")
    return int(np.unique(predicted).size)
