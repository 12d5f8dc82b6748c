"""Normalized spectral clustering (symmetric Laplacian, row-normalized embedding)."""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, eigh

from .affinity import AffinityMatrix
from .exceptions import EigenFailure


def normalized_laplacian(A) -> np.ndarray:
    """``I - G^{-1/2} A G^{-1/2}``; zero-degree vertices get unit degree."""
    W = np.asarray(getattr(A, "values", A), dtype=np.float64)
    deg = W.sum(axis=1)
    deg[deg <= 0] = 1.0
    s = 1.0 / np.sqrt(deg)
    L = -(s[:, None] * W * s[None, :])
    L[np.diag_indices_from(L)] += 1.0
    # exact symmetry for the eigensolver
    return (L + L.T) / 2.0


def laplacian_spectrum(A) -> np.ndarray:
    """All eigenvalues of the normalized Laplacian, ascending."""
    try:
        return eigh(normalized_laplacian(A), eigvals_only=True, check_finite=False)
    except LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc


def spectral_embedding(A, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized eigenvectors of the ``K`` smallest Laplacian eigenvalues.

    Returns ``(embedding, eigenvalues)``; rows of zero norm stay zero.
    """
    L = normalized_laplacian(A)
    try:
        evals, evecs = eigh(L, subset_by_index=[0, K - 1], check_finite=False)
    except LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    norms = np.linalg.norm(evecs, axis=1)
    nz = norms > 1e-12
    V = np.zeros_like(evecs)
    V[nz] = evecs[nz] / norms[nz, None]
    return V, evals


def _sq_dists(X, C):
    """Squared distances from rows of X (n, f) to centers C (R, K, f) -> (R, n, K)."""
    xx = np.einsum("nf,nf->n", X, X)
    cc = np.einsum("rkf,rkf->rk", C, C)
    d2 = xx[None, :, None] - 2.0 * (C @ X.T).transpose(0, 2, 1) + cc[:, None, :]
    return np.maximum(d2, 0.0)


def _kmeanspp(X, K, uniforms):
    """k-means++ seeding for R restarts at once; ``uniforms`` has shape (R, K)."""
    n = X.shape[0]
    R = uniforms.shape[0]
    idx = np.empty((R, K), dtype=np.int64)
    idx[:, 0] = np.minimum((uniforms[:, 0] * n).astype(np.int64), n - 1)
    best = np.sum((X[None, :, :] - X[idx[:, 0]][:, None, :]) ** 2, axis=2)  # (R, n)
    for k in range(1, K):
        total = best.sum(axis=1)
        cum = np.cumsum(best, axis=1)
        target = uniforms[:, k] * total
        pick = np.minimum((cum <= target[:, None]).sum(axis=1), n - 1)
        # all mass on chosen centers: fall back to a uniform index
        flat = total <= 0
        pick[flat] = np.minimum((uniforms[flat, k] * n).astype(np.int64), n - 1)
        idx[:, k] = pick
        d_new = np.sum((X[None, :, :] - X[pick][:, None, :]) ** 2, axis=2)
        best = np.minimum(best, d_new)
    return X[idx]


def kmeans(X, K: int, seed: int = 0, n_init: int = 100, max_iter: int = 300):
    """Lloyd's algorithm with k-means++ seeding, ``n_init`` restarts run as one batch.

    Each restart draws its seeding from its own child stream of ``seed``.
    The restart with the lowest inertia wins, ties going to the lower
    restart index. Returns ``(labels, inertia)``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    children = np.random.SeedSequence(seed).spawn(n_init)
    uniforms = np.stack([np.random.default_rng(c).random(K) for c in children])
    C = _kmeanspp(X, K, uniforms)
    R = n_init
    labels = np.argmin(_sq_dists(X, C), axis=2)
    active = np.arange(R)
    for _ in range(max_iter):
        if active.size == 0:
            break
        C[active] = _update_centers(X, C[active], labels[active], K)
        new = np.argmin(_sq_dists(X, C[active]), axis=2)
        moved = np.any(new != labels[active], axis=1)
        labels[active] = new
        active = active[moved]
    d2 = _sq_dists(X, C)
    inertia = np.take_along_axis(d2, labels[:, :, None], axis=2)[:, :, 0].sum(axis=1)
    best = int(np.argmin(inertia))
    return _canonical(labels[best]), float(inertia[best])


def _update_centers(X, C, labels, K):
    """Cluster means per restart; empty clusters move to the worst-fit point."""
    R, n = labels.shape
    flat = (labels + K * np.arange(R)[:, None]).ravel()
    counts = np.bincount(flat, minlength=R * K).reshape(R, K)
    sums = np.stack([np.bincount(flat, weights=np.tile(col, R), minlength=R * K)
                     for col in X.T], axis=1).reshape(R, K, -1)
    C_new = sums / np.maximum(counts, 1)[:, :, None]
    for r, k in zip(*np.nonzero(counts == 0)):
        d = np.sum((X - C[r, labels[r]]) ** 2, axis=1)
        C_new[r, k] = X[int(np.argmax(d))]
    return C_new


def _canonical(labels) -> np.ndarray:
    """Rename clusters in order of first appearance."""
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv].astype(np.int64)


def spectral_cluster(A: AffinityMatrix, K: int, seed: int = 0,
                     n_init: int = 100, max_iter: int = 300) -> np.ndarray:
    """Cluster the vertices of a symmetric nonnegative affinity into ``K`` groups."""
    W = np.asarray(getattr(A, "values", A))
    if W.shape[0] < K:
        raise ValueError(f"cannot form {K} clusters from {W.shape[0]} vertices")
    V, _ = spectral_embedding(W, K)
    labels, _ = kmeans(V, K, seed=seed, n_init=n_init, max_iter=max_iter)
    return labels
