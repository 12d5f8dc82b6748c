from itertools import permutations

import numpy as np
import pytest

from sbsc.exceptions import LengthMismatch
from sbsc.metrics import accuracy, align_labels, contingency, nmi


def brute_accuracy(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    K = max(pred.max(), truth.max()) + 1
    return max(np.mean(np.array(p)[pred] == truth) for p in permutations(range(K)))


def test_accuracy_examples():
    t = [0, 0, 1, 1, 2]
    assert accuracy(t, t) == 1.0
    assert accuracy([2, 2, 0, 0, 1], t) == 1.0
    assert accuracy([0, 1, 1, 1], [0, 0, 1, 1]) == 0.75 == brute_accuracy([0, 1, 1, 1], [0, 0, 1, 1])
    with pytest.raises(LengthMismatch):
        accuracy([0, 1], [0])


def test_accuracy_matches_exhaustive(rng):
    for _ in range(100):
        K = int(rng.integers(1, 5))
        n = int(rng.integers(1, 30))
        p, t = rng.integers(0, K, n), rng.integers(0, K, n)
        assert accuracy(p, t) == brute_accuracy(p, t)


def test_constant_prediction_gets_majority_share():
    truth = np.array([0, 0, 0, 1, 2])
    assert accuracy(np.zeros(5, int), truth) == 0.6


def test_nmi_examples():
    assert nmi([0, 0, 1, 1, 2], [1, 1, 0, 0, 2]) == pytest.approx(1.0)
    assert nmi([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0
    assert nmi([0, 0, 0], [1, 1, 1]) == 1.0
    assert nmi([0, 1, 0, 1], [0, 0, 1, 1]) == pytest.approx(0.0, abs=1e-15)


def test_nmi_plugin_oracle(rng):
    p, t = rng.integers(0, 3, 50), rng.integers(0, 4, 50)
    P = np.array([[np.mean((p == i) & (t == j)) for j in range(4)] for i in range(3)])
    pi, pj = P.sum(1), P.sum(0)
    nz = P > 0
    mi = np.sum(P[nz] * np.log(P[nz] / np.outer(pi, pj)[nz]))
    H = lambda q: -np.sum(q[q > 0] * np.log(q[q > 0]))  # noqa: E731
    assert nmi(p, t) == pytest.approx(mi / np.sqrt(H(pi) * H(pj)), rel=1e-12)
    assert nmi(p, t, average="arithmetic") == pytest.approx(mi / ((H(pi) + H(pj)) / 2), rel=1e-12)
    with pytest.raises(ValueError):
        nmi(p, t, average="max")


def test_nmi_range_and_symmetry(rng):
    for _ in range(200):
        n = int(rng.integers(2, 40))
        p, t = rng.integers(0, 4, n), rng.integers(0, 4, n)
        v = nmi(p, t)
        assert -1e-12 <= v <= 1 + 1e-12
        assert v == pytest.approx(nmi(t, p), abs=1e-12)
        assert v == pytest.approx(nmi((p + 1) % 4, t), abs=1e-12)


def test_contingency_marginals():
    tab = contingency([0, 1, 1, 2], [1, 1, 0, 0])
    assert tab.total == 4
    assert tab.row_marginals.tolist() == [1, 2, 1]
    assert tab.col_marginals.tolist() == [2, 2]


def test_align_examples(rng):
    ref = np.array([0, 0, 1, 1, 2])
    assert align_labels(ref, np.array([1, 1, 0, 0, 2])).tolist() == ref.tolist()
    assert align_labels(ref, ref).tolist() == ref.tolist()
    with pytest.raises(LengthMismatch):
        align_labels(ref, ref[:3])
    for _ in range(20):
        a, b = rng.integers(0, 3, 20), rng.integers(0, 3, 20)
        best = max(np.mean(np.array(p)[b] == a) for p in permutations(range(3)))
        assert np.mean(align_labels(a, b, 3) == a) == best
