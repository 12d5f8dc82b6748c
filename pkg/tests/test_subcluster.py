import numpy as np
import pytest

from sbsc.dataset import Dataset, SyntheticSpec, generate_synthetic
from sbsc.exceptions import BadDmax, MissingLabels
from sbsc.subcluster import SubCluster, build_subcluster, build_subclusters, subcluster_preserving_rate


def brute_members(Y, q, d_max):
    scores = np.abs(Y.T @ Y[:, q])
    others = [i for i in range(Y.shape[1]) if i != q]
    # largest score first, smaller index on ties
    ranked = sorted(others, key=lambda i: (-scores[i], i))
    return sorted([q] + ranked[:d_max])


def test_small_example():
    Y = np.array([[1.0, 0.8, 0.0], [0.0, 0.6, 1.0]])
    sc = build_subcluster(Dataset(Y), 0, 1)
    assert sc.members.tolist() == [0, 1]
    np.testing.assert_array_equal(sc.block, Y[:, [0, 1]])


def test_full_set():
    data = generate_synthetic(SyntheticSpec.balanced(2, 2, 4, 5, seed=1))
    sc = build_subcluster(data, 3, data.N - 1)
    assert sc.members.tolist() == list(range(data.N))


def test_duplicate_of_anchor_selected_first():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((5, 8))
    Y[:, 6] = -Y[:, 2]
    Y /= np.linalg.norm(Y, axis=0)
    assert build_subcluster(Dataset(Y), 2, 1).members.tolist() == [2, 6]


def test_ties_go_to_smaller_index():
    Y = np.array([[1.0, 0.0, 0.6, 0.6, 0.6], [0.0, 1.0, 0.8, -0.8, 0.8]])
    assert build_subcluster(Dataset(Y), 0, 2).members.tolist() == [0, 2, 3]


@pytest.mark.parametrize("seed", range(5))
def test_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    # coarse values create many exact ties
    Y = rng.integers(-2, 3, size=(3, 30)).astype(float)
    Y[:, np.linalg.norm(Y, axis=0) == 0] = 1.0
    data = Dataset(Y / np.linalg.norm(Y, axis=0))
    anchors = rng.choice(30, size=10, replace=False)
    for d_max in (1, 4, 29):
        for sc, q in zip(build_subclusters(data, anchors, d_max), anchors):
            assert sc.anchor == q
            assert sc.members.tolist() == brute_members(data.points, q, d_max)
            assert sc.size == d_max + 1


def test_sign_flip_invariance():
    data = generate_synthetic(SyntheticSpec.balanced(3, 2, 6, 20, 0.1, seed=4))
    flip = data.points * np.where(np.arange(data.N) % 3 == 0, -1.0, 1.0)
    a = build_subclusters(data, range(10), 5)
    b = build_subclusters(Dataset(flip), range(10), 5)
    assert all(np.array_equal(x.members, y.members) for x, y in zip(a, b))


@pytest.mark.parametrize("d_max", [0, 10])
def test_bad_dmax(d_max):
    with pytest.raises(BadDmax):
        build_subcluster(Dataset(np.eye(10)), 0, d_max)


def test_preserving_rate_counts():
    subs = [SubCluster(0, np.array([0, 1]), None), SubCluster(2, np.array([2, 3]), None)]
    assert subcluster_preserving_rate(subs, [0, 0, 1, 1]) == 1.0
    assert subcluster_preserving_rate(subs, [0, 0, 1, 0]) == 0.5
    with pytest.raises(MissingLabels):
        subcluster_preserving_rate(subs, None)


@pytest.mark.parametrize("seed", range(10))
def test_noiseless_regime_preserving(seed):
    data = generate_synthetic(SyntheticSpec.balanced(5, 5, 30, 1000, 0.0, seed=seed))
    anchors = np.random.default_rng(seed).choice(data.N, 100, replace=False)
    subs = build_subclusters(data, anchors, 10)
    assert subcluster_preserving_rate(subs, data.labels) == 1.0
