import warnings

import numpy as np
import pytest

from conftest import explicit_distance, explicit_residual
from sbsc.exceptions import DegenerateSubcluster, NonFiniteInput
from sbsc.ridge import (RidgeFactor, cluster_distance, distance_matrix, positive_eigenvalues,
                        recommend_lambda, residual_matrix, ridge_residual)


def test_single_column_closed_form():
    b = np.array([0.0, 1.0, 0.0])
    assert ridge_residual(b, b, 1.0) == pytest.approx(0.5, abs=1e-15)
    for lam in (0.01, 0.3, 2.0):
        assert ridge_residual(b, b, lam) == pytest.approx(lam / (1 + lam), rel=1e-13)
        assert cluster_distance(b, b, lam) == pytest.approx(2 * lam / (1 + lam), rel=1e-13)


def test_orthogonal_gives_full_norm():
    A = np.array([[0.0, 0.0], [3.0, 1.0], [0.0, 2.0]])
    B = np.array([[1.0], [0.0], [0.0]])
    assert ridge_residual(A, B, 0.2) == pytest.approx(np.linalg.norm(A), rel=1e-14)
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert cluster_distance(a, b, 0.7) == pytest.approx(2.0, rel=1e-14)


def test_random_against_explicit_inverse(rng):
    A, B = rng.standard_normal((4, 3)), rng.standard_normal((4, 2))
    assert ridge_residual(A, B, 0.1) == pytest.approx(explicit_residual(A, B, 0.1), abs=1e-10)


def test_push_through_identity(rng):
    for _ in range(100):
        D, p = rng.integers(2, 9), rng.integers(1, 6)
        W = rng.standard_normal((D, p))
        lam = 10 ** rng.uniform(-3, 1)
        left = np.linalg.solve(W.T @ W + lam * np.eye(p), W.T)
        right = W.T @ np.linalg.inv(W @ W.T + lam * np.eye(D))
        assert np.abs(left - right).max() <= 1e-10
        np.testing.assert_allclose(RidgeFactor(W, lam).coef(np.eye(D)), left, atol=1e-10)


def test_monotone_in_lambda_and_contraction(rng):
    for _ in range(20):
        A = rng.standard_normal((6, 4))
        lams = np.geomspace(1e-4, 1e2, 25)
        vals = [ridge_residual(A, A, lam) for lam in lams]
        assert np.all(np.diff(vals) >= -1e-12)
        B = rng.standard_normal((6, 3))
        assert ridge_residual(A, B, 0.5) <= np.linalg.norm(A) + 1e-12


def test_distance_is_exactly_symmetric(rng):
    A, B = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
    assert cluster_distance(A, B, 0.3) == cluster_distance(B, A, 0.3)


@pytest.mark.parametrize("D,p", [(6, 4), (30, 3), (10, 2)])
def test_batched_matrix_matches_pairs(rng, D, p):
    blocks = [rng.standard_normal((D, p)) for _ in range(7)]
    R = residual_matrix(blocks, 0.05)
    for i in range(7):
        for j in range(7):
            assert R[i, j] == pytest.approx(explicit_residual(blocks[i], blocks[j], 0.05), abs=1e-9)
    Dm = distance_matrix(blocks, 0.05)
    assert np.array_equal(Dm, Dm.T)
    assert Dm[1, 4] == pytest.approx(explicit_distance(blocks[1], blocks[4], 0.05), abs=1e-9)


def test_non_finite_rejected():
    with pytest.raises(NonFiniteInput):
        ridge_residual(np.array([np.nan, 1.0]), np.array([1.0, 0.0]), 1.0)
    with pytest.raises(ValueError):
        ridge_residual(np.ones(2), np.ones(2), 0.0)


def test_recommend_lambda_unit_spectrum():
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((10, 3)))[0]
    assert recommend_lambda([Q], D=10, N=500, noisy=True) == pytest.approx(np.sqrt(3) / 10)
    assert recommend_lambda([Q], D=10, N=500, noisy=False) == pytest.approx(np.sqrt(3) / 500)


def test_recommend_lambda_rank3_oracle(rng):
    blocks = [rng.standard_normal((8, 3)) @ rng.standard_normal((3, 6)) for _ in range(4)]
    expected = 0.0
    for B in blocks:
        ev = np.linalg.eigh(B @ B.T)[0]
        ev = ev[ev > 1e-12 * ev.max()]
        expected = max(expected, np.sqrt(np.sum(1 / ev**2)))
    assert recommend_lambda(blocks, 8, 100) == pytest.approx(expected / 8, rel=1e-9)
    assert positive_eigenvalues(blocks[0]).size == 3


def test_recommend_lambda_short_rank_warns_and_zero_fails(rng):
    B = np.outer(rng.standard_normal(5), rng.standard_normal(4))
    with pytest.warns(RuntimeWarning):
        recommend_lambda([B], 5, 10, d=2)
    with pytest.raises(DegenerateSubcluster):
        recommend_lambda([B, np.zeros((5, 4))], 5, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        recommend_lambda([B], 5, 10, d=1)
