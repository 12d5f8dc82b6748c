"""Sub-cluster construction: an anchor plus its nearest neighbours by |inner product|."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .exceptions import BadDmax, MissingLabels

# anchors processed per matrix product; bounds the N x chunk buffer
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class SubCluster:
    anchor: int
    members: np.ndarray  # ascending indices, anchor included
    block: np.ndarray    # D x (d_max + 1) columns of ``members``

    @property
    def size(self) -> int:
        return self.members.size


def _check_dmax(d_max, N):
    if not 1 <= d_max <= N - 1:
        raise BadDmax(f"d_max must lie in [1, {N - 1}], got {d_max}")


def _select(scores: np.ndarray, d_max: int) -> np.ndarray:
    """Boolean mask of the d_max largest entries per column, ties to lower index."""
    N = scores.shape[0]
    thr = np.partition(scores, N - d_max, axis=0)[N - d_max]
    above = scores > thr
    need = d_max - above.sum(axis=0)
    tied = scores == thr
    keep_tied = tied & (np.cumsum(tied, axis=0) <= need)
    return above | keep_tied


def build_subclusters(data: Dataset, anchors, d_max: int) -> list[SubCluster]:
    """Sub-clusters for every anchor index, one matrix product per chunk of anchors."""
    Y = data.points
    N = data.N
    _check_dmax(d_max, N)
    anchors = np.asarray(anchors, dtype=np.int64).ravel()
    chunk = max(1, _CHUNK_ELEMS // max(N, 1))
    out = []
    for start in range(0, anchors.size, chunk):
        idx = anchors[start:start + chunk]
        scores = np.abs(Y.T @ Y[:, idx])
        # the anchor is always a member; keep it out of the neighbour ranking
        scores[idx, np.arange(idx.size)] = -1.0
        mask = _select(scores, d_max)
        mask[idx, np.arange(idx.size)] = True
        for c, q in enumerate(idx):
            members = np.flatnonzero(mask[:, c])
            out.append(SubCluster(int(q), members, Y[:, members]))
    return out


def build_subcluster(data: Dataset, q: int, d_max: int) -> SubCluster:
    """The anchor ``q`` together with its ``d_max`` largest-|<y_q, y_i>| neighbours."""
    if not 0 <= q < data.N:
        raise IndexError(f"anchor {q} out of range")
    return build_subclusters(data, [q], d_max)[0]


def subcluster_preserving_rate(subclusters, truth_labels) -> float:
    """Fraction of sub-clusters whose members all carry the same true label."""
    if truth_labels is None:
        raise MissingLabels("ground-truth labels are required")
    truth = np.asarray(truth_labels)
    if not subclusters:
        return 1.0
    pure = 0
    for sc in subclusters:
        if sc.members.max() >= truth.size:
            raise MissingLabels(f"no label for member index {sc.members.max()}")
        lab = truth[sc.members]
        pure += bool(np.all(lab == lab[0]))
    return pure / len(subclusters)
