import numpy as np
import pytest

from sbsc.affinity import AffinityMatrix, sparsify, symmetrize
from sbsc.dataset import SyntheticSpec, generate_synthetic
from sbsc.ensemble import (SBSCParams, bag, default_grid, majority_vote, run_sbsc_once,
                           select_threshold)
from sbsc.metrics import accuracy
from sbsc.spectral import spectral_cluster


@pytest.fixture(scope="module")
def noiseless():
    return generate_synthetic(SyntheticSpec.balanced(5, 5, 30, 1000, 0.0, seed=3))


def planted():
    V = np.full((12, 12), 0.05)
    V[:6, :6] = 0.5
    V[:3, :3] = V[3:6, 3:6] = 0.9
    V[6:, 6:] = 0.8
    np.fill_diagonal(V, 1.0)
    return AffinityMatrix(V), np.repeat([0, 1], 6)


def test_default_grid():
    assert default_grid(250, 5) == (100, 50, 34, 25, 20, 17)
    assert default_grid(3, 5) == (2, 1)
    assert all(1 <= t <= 7 for t in default_grid(7, 1))


def test_single_candidate():
    A, _ = planted()
    c = select_threshold(A, 2, [4])
    assert c.t_max == 4 and c.scores == {4: 1.0}


def test_identical_labelings_pick_largest():
    V = np.kron(np.eye(2), np.ones((5, 5)))
    V[V == 0] = 0.01
    c = select_threshold(AffinityMatrix(V), 2, [10, 7, 5])
    assert c.t_max == 10 and set(c.scores.values()) == {1.0}


def test_planted_instance_exhaustive():
    A, truth = planted()
    grid = [12, 6, 4, 3, 2]
    per_t = {t: accuracy(spectral_cluster(symmetrize(sparsify(A, t)), 2), truth) for t in grid}
    assert min(per_t.values()) < 1.0  # some threshold breaks the first block
    c = select_threshold(A, 2, grid)
    assert per_t[c.t_max] == 1.0
    assert accuracy(c.labels, truth) == 1.0


def test_scaling_raw_affinity_keeps_partitions():
    A, _ = planted()
    scaled = AffinityMatrix(A.values * 0.37)
    for t in (12, 6, 3):
        assert np.array_equal(sparsify(A, t).values > 0, sparsify(scaled, t).values > 0)
    a = select_threshold(A, 2, [12, 6])
    b = select_threshold(scaled, 2, [12, 6])
    # at t=3 the graph has three components, so its null space has no unique basis
    for t in (12, 6):
        assert accuracy(a.labelings[t], b.labelings[t]) == 1.0


def test_params_resolve_and_validate():
    p = SBSCParams(K=5).resolve(10_000, 30)
    assert p.n == int(np.ceil(8 * 5 * np.log(10_000)))
    assert p.d_max == 18 and p.m == 9
    assert p.threshold_grid == default_grid(p.n, 5)
    bad = [dict(n=20_000), dict(d_max=10_000), dict(threshold_grid=[0]), dict(bags=0),
           dict(lambda1=-1.0), dict(lambda2="fast"), dict(m=0)]
    for kw in bad:
        with pytest.raises(ValueError):
            SBSCParams(K=5, **kw).resolve(10_000, 30)


def test_noiseless_exact(noiseless):
    params = SBSCParams(K=5, n=250, d_max=19, m=10, noisy=False, d=5)
    info, timings = {}, {}
    labels = run_sbsc_once(noiseless, params, info=info, timings=timings)
    assert labels.shape == (noiseless.N,)
    assert accuracy(labels, noiseless.labels) == 1.0
    assert set(timings) == {"subsample", "subclusters", "affinity", "spectral", "oos"}
    assert info["t_max"] in params.resolve(noiseless.N, 30).threshold_grid


def test_subsample_keeps_spectral_labels(noiseless):
    params = SBSCParams(K=5, n=100, d_max=19, m=10, seed=4)
    info = {}
    labels = run_sbsc_once(noiseless, params, info=info)
    A = info["affinity"]
    relabelled = select_threshold(A, 5, [info["t_max"]], seed=_spectral_seed(4)).labels
    assert np.array_equal(labels[info["sample"]], relabelled)


def _spectral_seed(seed):
    from sbsc.ensemble import _child_seeds
    return _child_seeds(seed, 3)[1]


def test_full_sample_degenerates_to_spectral():
    data = generate_synthetic(SyntheticSpec.balanced(2, 2, 8, 15, 0.0, seed=1))
    info = {}
    labels = run_sbsc_once(data, SBSCParams(K=2, n=data.N, d_max=5, m=3), info=info)
    assert info["lambda2"] is None
    assert accuracy(labels, data.labels) == 1.0


def test_seed_determinism_and_bag_one(noiseless):
    params = SBSCParams(K=5, n=120, d_max=10, m=8, seed=11)
    a = run_sbsc_once(noiseless, params)
    assert np.array_equal(a, run_sbsc_once(noiseless, params))
    assert np.array_equal(bag(noiseless, params), a)


def test_bag_thread_independent():
    data = generate_synthetic(SyntheticSpec.balanced(3, 3, 12, 200, 0.15, seed=5))
    p = SBSCParams(K=3, n=60, d_max=8, m=6, bags=4, seed=2)
    serial = bag(data, p)
    threaded = bag(data, SBSCParams(**{**p.__dict__, "threads": 3}))
    assert np.array_equal(serial, threaded)


def test_majority_vote_rules():
    assert majority_vote([[0, 1], [0, 1], [0, 1]]).tolist() == [0, 1]
    assert majority_vote([[2, 0], [2, 1], [0, 1]]).tolist() == [2, 1]
    # three-way tie: first run wins
    assert majority_vote([[1], [2], [0]]).tolist() == [1]
    # tie where the first run's label is among the leaders
    assert majority_vote([[0], [1], [1], [0]]).tolist() == [0]
