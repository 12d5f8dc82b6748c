"""End-to-end pipeline: subsample, sub-clusters, affinity, threshold search,
spectral labels, out-of-sample labelling, and bagged majority voting."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .affinity import AffinityMatrix, build_affinity, sparsify, symmetrize
from .dataset import Dataset
from .metrics import align_labels
from .oos import classify, fit_projectors
from .ridge import recommend_lambda
from .spectral import spectral_cluster
from .subcluster import build_subclusters

Lambda = Union[float, str]

STAGES = ("subsample", "subclusters", "affinity", "spectral", "oos", "vote")


@dataclass(frozen=True)
class SBSCParams:
    """Pipeline settings. ``None`` fields are filled by :meth:`resolve`.

    ``d`` optionally declares the subspace dimension used by the lambda
    heuristic; ``noisy`` picks its 1/D (noisy) or 1/N (noiseless) scaling.
    """

    K: int
    n: Optional[int] = None
    d_max: Optional[int] = None
    lambda1: Lambda = "auto"
    lambda2: Lambda = "auto"
    m: Optional[int] = None
    threshold_grid: Optional[Sequence[int]] = None
    bags: int = 1
    seed: int = 0
    noisy: bool = True
    d: Optional[int] = None
    threads: int = 1

    def resolve(self, N: int, D: int) -> "SBSCParams":
        """Fill defaults for a data set of ``N`` points in R^D and validate."""
        K = self.K
        n = self.n if self.n is not None else min(N, math.ceil(8 * K * math.log(N)))
        d_max = self.d_max if self.d_max is not None else min(N - 1, math.ceil(0.6 * D))
        m = self.m if self.m is not None else math.ceil(0.3 * D)
        grid = (tuple(int(t) for t in self.threshold_grid)
                if self.threshold_grid is not None else default_grid(n, K))
        out = replace(self, n=n, d_max=d_max, m=m, threshold_grid=grid)
        out.validate(N)
        return out

    def validate(self, N: int) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.K <= self.n <= N:
            raise ValueError(f"need K <= n <= N, got n={self.n}, K={self.K}, N={N}")
        if not 1 <= self.d_max <= N - 1:
            raise ValueError(f"need 1 <= d_max <= N-1, got {self.d_max}")
        if not self.threshold_grid:
            raise ValueError("threshold grid is empty")
        if not all(1 <= t <= self.n for t in self.threshold_grid):
            raise ValueError(f"threshold candidates must lie in [1, {self.n}]")
        if self.bags < 1:
            raise ValueError("bags must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        for name in ("lambda1", "lambda2"):
            v = getattr(self, name)
            if isinstance(v, str):
                if v != "auto":
                    raise ValueError(f"{name} must be positive or 'auto'")
            elif not v > 0:
                raise ValueError(f"{name} must be positive or 'auto'")


def default_grid(n: int, K: int) -> tuple:
    """Descending sweep 2n/K, n/K, n/1.5K, ..., n/3K clipped to [1, n], deduplicated."""
    grid = []
    for div in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        t = min(n, max(1, math.ceil(n / (div * K))))
        if t not in grid:
            grid.append(t)
    return tuple(grid)


@dataclass
class ThresholdChoice:
    t_max: int
    labels: np.ndarray
    scores: dict = field(default_factory=dict)
    labelings: dict = field(default_factory=dict, repr=False)


def select_threshold(A: AffinityMatrix, K: int, grid: Sequence[int], seed: int = 0,
                     n_init: int = 100) -> ThresholdChoice:
    """Pick the sparsification level whose labeling is most stable.

    Each candidate is scored by its mean aligned agreement with the
    labelings of its neighbours in the grid; the best score wins, ties to
    the larger threshold.
    """
    grid = list(dict.fromkeys(int(t) for t in grid))
    if not grid:
        raise ValueError("threshold grid is empty")
    labelings = {}
    for t in grid:
        S = symmetrize(sparsify(A, t))
        labelings[t] = spectral_cluster(S, K, seed=seed, n_init=n_init)
    if len(grid) == 1:
        t = grid[0]
        return ThresholdChoice(t, labelings[t], {t: 1.0}, labelings)
    scores = {}
    for pos, t in enumerate(grid):
        nbrs = [grid[q] for q in (pos - 1, pos + 1) if 0 <= q < len(grid)]
        agree = [np.mean(align_labels(labelings[t], labelings[u], K) == labelings[t])
                 for u in nbrs]
        scores[t] = float(np.mean(agree))
    best = max(scores.values())
    # larger threshold wins ties
    t_best = max(t for t, s in scores.items() if s == best)
    return ThresholdChoice(t_best, labelings[t_best], scores, labelings)


def _child_seeds(seed: int, count: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in ss.spawn(count)]


def _resolve_lambda(value, blocks, D, N, params):
    if isinstance(value, str):
        return recommend_lambda(blocks, D, N, noisy=params.noisy, d=params.d)
    return float(value)


def run_sbsc_once(data: Dataset, params: SBSCParams, seed: Optional[int] = None,
                  timings: Optional[dict] = None, info: Optional[dict] = None) -> np.ndarray:
    """One pass of the sampling-based pipeline; returns N labels in 0..K-1.

    Subsampled points keep their spectral labels; the rest are labelled by
    ridge-residual minimization. Pass dicts as ``timings``/``info`` to
    collect per-stage seconds and intermediate choices.
    """
    p = params.resolve(data.N, data.D)
    seed = p.seed if seed is None else seed
    s_sample, s_spectral, s_oos = _child_seeds(seed, 3)
    clock = _Clock(timings)

    rng = np.random.default_rng(s_sample)
    sample = np.sort(rng.choice(data.N, size=p.n, replace=False))
    clock.lap("subsample")

    subs = build_subclusters(data, sample, p.d_max)
    clock.lap("subclusters")

    lam1 = _resolve_lambda(p.lambda1, subs, data.D, data.N, p)
    A = build_affinity(subs, lam1)
    clock.lap("affinity")

    choice = select_threshold(A, p.K, p.threshold_grid, seed=s_spectral)
    sub_labels = choice.labels
    clock.lap("spectral")

    labels = np.empty(data.N, dtype=np.int64)
    labels[sample] = sub_labels
    rest = np.setdiff1d(np.arange(data.N), sample, assume_unique=True)
    lam2 = None
    if rest.size:
        proj = fit_projectors(data.subset(sample), sub_labels, p.m,
                              lam=p.lambda2, seed=s_oos, K=p.K, noisy=p.noisy,
                              d=p.d, N_total=data.N)
        lam2 = proj.lam
        labels[rest] = classify(data.points[:, rest], proj)
    clock.lap("oos")

    if info is not None:
        info.update(sample=sample, t_max=choice.t_max, scores=choice.scores,
                    lambda1=lam1, lambda2=lam2, subclusters=subs, affinity=A)
    return labels


def majority_vote(runs: Sequence[np.ndarray]) -> np.ndarray:
    """Per-point plurality over aligned runs.

    Ties go to the first run's label when it is among the leaders,
    otherwise to the smallest leading label.
    """
    runs = np.asarray(runs, dtype=np.int64)
    B, N = runs.shape
    K = int(runs.max()) + 1
    votes = np.zeros((N, K), dtype=np.int64)
    for r in runs:
        votes[np.arange(N), r] += 1
    top = votes.max(axis=1)
    first_ok = votes[np.arange(N), runs[0]] == top
    return np.where(first_ok, runs[0], np.argmax(votes, axis=1))


def bag(data: Dataset, params: SBSCParams, timings: Optional[dict] = None,
        infos: Optional[list] = None) -> np.ndarray:
    """Run the pipeline ``bags`` times (seeds ``seed + b``) and vote after alignment."""
    p = params.resolve(data.N, data.D)
    seeds = [p.seed + b for b in range(p.bags)]
    per_run_t = [dict() for _ in seeds]
    per_run_i = [dict() for _ in seeds]

    def one(b):
        return run_sbsc_once(data, p, seeds[b], timings=per_run_t[b], info=per_run_i[b])

    if p.threads > 1 and p.bags > 1:
        with ThreadPoolExecutor(max_workers=p.threads) as ex:
            runs = list(ex.map(one, range(p.bags)))
    else:
        runs = [one(b) for b in range(p.bags)]

    clock = _Clock(timings)
    if len(runs) == 1:
        result = runs[0]
    else:
        aligned = [runs[0]] + [align_labels(runs[0], r, p.K) for r in runs[1:]]
        result = majority_vote(aligned)
    clock.lap("vote")
    if timings is not None:
        for t in per_run_t:
            for k, v in t.items():
                timings[k] = timings.get(k, 0.0) + v
    if infos is not None:
        infos.extend(per_run_i)
    return result


class _Clock:
    def __init__(self, sink):
        self.sink = sink
        self.t = time.perf_counter()

    def lap(self, stage):
        now = time.perf_counter()
        if self.sink is not None:
            self.sink[stage] = self.sink.get(stage, 0.0) + (now - self.t)
        self.t = now
