import numpy as np
import pytest


def explicit_residual(A, B, lam):
    """Dense reference: invert B^T B + lam I explicitly."""
    A = np.atleast_2d(np.asarray(A, float).T).T
    B = np.atleast_2d(np.asarray(B, float).T).T
    inv = np.linalg.inv(B.T @ B + lam * np.eye(B.shape[1]))
    return float(np.linalg.norm(A - B @ inv @ B.T @ A))


def explicit_distance(A, B, lam):
    return explicit_residual(A, B, lam) + explicit_residual(B, A, lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
