"""Sub-cluster affinity matrix: build, per-row sparsification, symmetrization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import BadThreshold
from .ridge import distance_matrix

RAW, SPARSIFIED, SYMMETRIZED = "raw", "sparsified", "symmetrized"


@dataclass(frozen=True)
class AffinityMatrix:
    values: np.ndarray
    state: str = RAW

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")


def affinity_from_distances(dist) -> AffinityMatrix:
    """``exp(-d / 2)`` off the diagonal; self-affinity fixed at 1."""
    values = np.exp(-np.asarray(dist, dtype=np.float64) / 2.0)
    np.fill_diagonal(values, 1.0)
    return AffinityMatrix(values, RAW)


def build_affinity(subclusters, lam: float) -> AffinityMatrix:
    """Raw affinity between every pair of sub-clusters."""
    if len(subclusters) < 2:
        raise ValueError("need at least two sub-clusters")
    return affinity_from_distances(distance_matrix(subclusters, lam))


def sparsify(A: AffinityMatrix, t_max: int) -> AffinityMatrix:
    """Keep the ``t_max`` largest entries of each row and zero the rest.

    Ties are resolved in favour of the smaller column index.
    """
    V = A.values
    n = V.shape[1]
    if not 1 <= t_max <= n:
        raise BadThreshold(f"t_max must lie in [1, {n}], got {t_max}")
    if t_max == n:
        return AffinityMatrix(V.copy(), SPARSIFIED)
    keep = np.argsort(-V, axis=1, kind="stable")[:, :t_max]
    out = np.zeros_like(V)
    rows = np.arange(V.shape[0])[:, None]
    out[rows, keep] = V[rows, keep]
    return AffinityMatrix(out, SPARSIFIED)


def symmetrize(A: AffinityMatrix) -> AffinityMatrix:
    """``A + A^T``."""
    if A.state != SPARSIFIED:
        raise ValueError(f"expected a sparsified matrix, got state {A.state!r}")
    return AffinityMatrix(A.values + A.values.T, SYMMETRIZED)
