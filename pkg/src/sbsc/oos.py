"""Out-of-sample labelling by minimum ridge-regression residual."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .exceptions import EmptyClass, NonFiniteInput
from .ridge import RidgeFactor, recommend_lambda

_CHUNK = 65536


@dataclass(frozen=True)
class ProjectorSet:
    """Per-cluster training blocks ``R_k`` (D x m) with cached ridge factors."""

    blocks: tuple
    indices: tuple
    lam: float
    factors: tuple

    @property
    def K(self) -> int:
        return len(self.blocks)

    @property
    def D(self) -> int:
        return self.blocks[0].shape[0]

    def residuals(self, Y) -> np.ndarray:
        """(K, n) matrix of ridge residual norms for the columns of ``Y``."""
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]
        out = np.empty((self.K, Y.shape[1]))
        for start in range(0, Y.shape[1], _CHUNK):
            part = Y[:, start:start + _CHUNK]
            for k, f in enumerate(self.factors):
                out[k, start:start + _CHUNK] = f.residual_norms(part)
        return out


def sample_class_indices(labels, K: int, m: int, rng) -> list[np.ndarray]:
    """``m`` uniform picks per class; with replacement only for classes smaller than m."""
    labels = np.asarray(labels)
    picks = []
    for k in range(K):
        members = np.flatnonzero(labels == k)
        if members.size == 0:
            raise EmptyClass(k)
        replace = members.size < m
        picks.append(np.sort(rng.choice(members, size=m, replace=replace)))
    return picks


def fit_projectors(train: Dataset, labels, m: int, lam="auto", seed: int = 0,
                   K: int | None = None, noisy: bool = True,
                   d: int | None = None, N_total: int | None = None) -> ProjectorSet:
    """Sample ``m`` training points per label and factor their ridge systems.

    ``lam="auto"`` applies the eigenvalue heuristic of
    :func:`sbsc.ridge.recommend_lambda` to the sampled blocks; ``N_total``
    is the size of the full data set used by its noiseless scaling.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if K is None:
        K = int(labels.max()) + 1
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    picks = sample_class_indices(labels, K, m, rng)
    Y = train.points
    blocks = tuple(Y[:, p] for p in picks)
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lambda must be a number or 'auto', got {lam!r}")
        lam = recommend_lambda(blocks, train.D, N_total or train.N, noisy=noisy, d=d)
    factors = tuple(RidgeFactor(b, lam) for b in blocks)
    return ProjectorSet(blocks, tuple(picks), float(lam), factors)


def classify(points, P: ProjectorSet) -> np.ndarray:
    """Label each column by the cluster with the smallest ridge residual."""
    Y = getattr(points, "points", points)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[0] != P.D:
        raise ValueError(f"points have dimension {Y.shape[0]}, projectors {P.D}")
    if not np.all(np.isfinite(Y)):
        raise NonFiniteInput("points contain NaN or infinite entries")
    if Y.shape[1] == 0:
        return np.empty(0, dtype=np.int64)
    # argmin returns the first minimum, so ties go to the smaller label
    return np.argmin(P.residuals(Y), axis=0).astype(np.int64)
