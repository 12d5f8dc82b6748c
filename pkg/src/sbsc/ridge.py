"""Ridge-regression residuals, the symmetric sub-cluster distance and lambda heuristics."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import DegenerateSubcluster, NonFiniteInput

EIG_REL_TOL = 1e-12
# largest n * D^2 buffer for the D-space route of residual_matrix
_GRAM_ELEMS = 20_000_000


def _as_2d(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x[:, None] if x.ndim == 1 else x


def _block(x) -> np.ndarray:
    return _as_2d(getattr(x, "block", x))


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteInput("input contains NaN or infinite entries")


def _check_lambda(lam):
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be a positive finite number, got {lam}")


class RidgeFactor:
    """Cholesky factor of ``B^T B + lam I`` reused across many right-hand sides."""

    def __init__(self, B, lam: float):
        _check_lambda(lam)
        B = _as_2d(B)
        _check_finite(B)
        self.B = B
        self.lam = float(lam)
        gram = B.T @ B
        gram[np.diag_indices_from(gram)] += self.lam
        self._cho = cho_factor(gram, lower=True, check_finite=False)

    def coef(self, A) -> np.ndarray:
        """Ridge coefficients ``(B^T B + lam I)^{-1} B^T A``."""
        return cho_solve(self._cho, self.B.T @ A, check_finite=False)

    def residual_matrix(self, A) -> np.ndarray:
        A = _as_2d(A)
        return A - self.B @ self.coef(A)

    def residual_norms(self, A) -> np.ndarray:
        """Per-column Euclidean norms of the residual."""
        return np.linalg.norm(self.residual_matrix(A), axis=0)

    def inverse(self) -> np.ndarray:
        p = self.B.shape[1]
        return cho_solve(self._cho, np.eye(p), check_finite=False)


def ridge_residual(A, B, lam: float) -> float:
    """Frobenius norm of ``A - B (B^T B + lam I)^{-1} B^T A``."""
    A, B = _as_2d(A), _as_2d(B)
    _check_finite(A, B)
    if A.shape[0] != B.shape[0]:
        raise ValueError(f"row mismatch: A has {A.shape[0]}, B has {B.shape[0]}")
    return float(np.linalg.norm(RidgeFactor(B, lam).residual_matrix(A)))


def cluster_distance(Ci, Cj, lam: float) -> float:
    """Symmetric distance: residual of i on j plus residual of j on i."""
    A, B = _block(Ci), _block(Cj)
    return ridge_residual(A, B, lam) + ridge_residual(B, A, lam)


def residual_matrix(blocks, lam: float) -> np.ndarray:
    """``R[i, j]`` = ridge residual of block i regressed on block j.

    All blocks must share a shape ``(D, p)``. When D is small relative to
    p^2 the residuals come from the D x D operators
    ``I - B_j (B_j^T B_j + lam I)^{-1} B_j^T`` and a single matrix product
    (cost n^2 D^2); otherwise each pair is solved in p-space.
    """
    _check_lambda(lam)
    stack = np.stack([_block(b) for b in blocks])  # (n, D, p)
    _check_finite(stack)
    n, D, p = stack.shape
    inv = np.stack([RidgeFactor(b, lam).inverse() for b in stack])  # (n, p, p)
    if D <= 2 * p * p and n * D * D <= _GRAM_ELEMS:
        return _residuals_dspace(stack, inv)
    return _residuals_pspace(stack, inv)


def _residuals_dspace(stack, inv):
    n, D, _ = stack.shape
    stack_t = stack.transpose(0, 2, 1)
    M = np.eye(D) - stack @ inv @ stack_t
    S = (M.transpose(0, 2, 1) @ M).reshape(n, D * D)
    G = (stack @ stack_t).reshape(n, D * D)
    # ||M_j A_i||_F^2 = <M_j^T M_j, A_i A_i^T>
    return np.sqrt(np.maximum(G @ S.T, 0.0))


def _residuals_pspace(stack, inv):
    n = stack.shape[0]
    stack_t = stack.transpose(0, 2, 1)
    R = np.empty((n, n))
    for i in range(n):
        A = stack[i]
        resid = A - stack @ (inv @ (stack_t @ A))  # (n, D, p)
        R[i] = np.sqrt(np.einsum("jdp,jdp->j", resid, resid))
    return R


def distance_matrix(blocks, lam: float) -> np.ndarray:
    """Pairwise cluster distances; exactly symmetric by construction."""
    R = residual_matrix(blocks, lam)
    return R + R.T


def positive_eigenvalues(block, tol: float = EIG_REL_TOL) -> np.ndarray:
    """Eigenvalues of ``Y Y^T`` above ``tol * largest``, in descending order.

    Computed from the smaller of the two Gram matrices; they share their
    positive spectrum.
    """
    Y = _block(block)
    gram = Y.T @ Y if Y.shape[1] <= Y.shape[0] else Y @ Y.T
    ev = np.linalg.eigvalsh(gram)[::-1]
    if ev.size == 0 or ev[0] <= 0:
        return ev[:0]
    return ev[ev > tol * ev[0]]


def recommend_lambda(subclusters, D: int, N: int, noisy: bool = True,
                     d: int | None = None) -> float:
    """Heuristic ridge weight ``scale * max_i sqrt(sum_j 1 / a_ij^2)``.

    ``a_ij`` are the positive eigenvalues of ``Y_i Y_i^T`` for each block,
    largest first, truncated to ``d`` when a subspace dimension is given.
    ``scale`` is ``1/D`` for noisy data and ``1/N`` for noiseless data.
    """
    worst = 0.0
    short = []
    for i, sc in enumerate(subclusters):
        ev = positive_eigenvalues(sc)
        if ev.size == 0:
            raise DegenerateSubcluster(i)
        if d is not None:
            if ev.size < d:
                short.append(i)
            ev = ev[:d]
        worst = max(worst, float(np.sqrt(np.sum(1.0 / ev**2))))
    if short:
        warnings.warn(
            f"{len(short)} block(s) have fewer than d={d} positive eigenvalues; "
            "summing over those found", RuntimeWarning, stacklevel=2)
    return worst / (D if noisy else N)
