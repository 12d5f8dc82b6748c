"""Clustering accuracy under best label matching, and normalized mutual information."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import LengthMismatch


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray       # rows: pred clusters, cols: truth clusters
    pred_values: np.ndarray
    truth_values: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def contingency(pred, truth) -> ContingencyTable:
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise LengthMismatch(f"{pred.size} predictions vs {truth.size} truth labels")
    pv, pi = np.unique(pred, return_inverse=True)
    tv, ti = np.unique(truth, return_inverse=True)
    counts = np.zeros((pv.size, tv.size), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ContingencyTable(counts, pv, tv)


def accuracy(pred, truth) -> float:
    """Best-permutation agreement between two labelings, in [0, 1]."""
    table = contingency(pred, truth)
    if table.total == 0:
        return 1.0
    r, c = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[r, c].sum()) / table.total


def _entropy(counts) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(pred, truth, average: str = "geometric") -> float:
    """Mutual information over ``sqrt(H(pred) H(truth))`` (natural logs).

    ``average="arithmetic"`` divides by the mean of the entropies instead.
    Two single-cluster partitions score 1; otherwise a zero entropy gives 0.
    """
    table = contingency(pred, truth)
    n = table.total
    if n == 0:
        return 1.0
    h_pred = _entropy(table.row_marginals)
    h_truth = _entropy(table.col_marginals)
    if h_pred == 0.0 or h_truth == 0.0:
        return 1.0 if (h_pred == 0.0 and h_truth == 0.0) else 0.0
    C = table.counts
    nz = C > 0
    outer = np.outer(table.row_marginals, table.col_marginals)
    mi = float(np.sum(C[nz] / n * np.log(C[nz] * n / outer[nz])))
    if average == "geometric":
        denom = np.sqrt(h_pred * h_truth)
    elif average == "arithmetic":
        denom = 0.5 * (h_pred + h_truth)
    else:
        raise ValueError(f"unknown average {average!r}")
    return float(min(max(mi / denom, 0.0), 1.0))


def align_labels(reference, candidate, K: int | None = None) -> np.ndarray:
    """Relabel ``candidate`` by the permutation that best agrees with ``reference``."""
    reference = np.asarray(reference, dtype=np.int64)
    candidate = np.asarray(candidate, dtype=np.int64)
    if reference.shape != candidate.shape:
        raise LengthMismatch(f"{candidate.size} labels vs reference {reference.size}")
    if K is None:
        K = int(max(reference.max(initial=-1), candidate.max(initial=-1))) + 1
    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (candidate, reference), 1)
    rows, cols = linear_sum_assignment(counts, maximize=True)
    mapping = np.empty(K, dtype=np.int64)
    mapping[rows] = cols
    return mapping[candidate]
