"""Sweeps over noise level or data size on synthetic union-of-subspaces data."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dataset import SyntheticSpec, generate_synthetic
from .ensemble import SBSCParams, bag
from .metrics import accuracy, nmi


@dataclass(frozen=True)
class SweepRow:
    level: float
    mean: float
    sd: float
    nmi_mean: float
    nmi_sd: float
    runtime: float
    runs: int

    HEADER = ("level", "mean", "sd", "nmi_mean", "nmi_sd", "runtime", "runs")

    def as_tuple(self):
        return (self.level, self.mean, self.sd, self.nmi_mean, self.nmi_sd,
                self.runtime, self.runs)


def _evaluate(spec: SyntheticSpec, params: SBSCParams):
    data = generate_synthetic(spec)
    t0 = time.perf_counter()
    labels = bag(data, params)
    elapsed = time.perf_counter() - t0
    return accuracy(labels, data.labels), nmi(labels, data.labels), elapsed


def _summarize(level, results) -> SweepRow:
    acc, nm, secs = (np.array(col, dtype=np.float64) for col in zip(*results))
    sd = lambda x: float(x.std(ddof=1)) if x.size > 1 else 0.0  # noqa: E731
    return SweepRow(float(level), float(acc.mean()), sd(acc), float(nm.mean()), sd(nm),
                    float(secs.mean()), len(results))


def sigma_sweep(base: SyntheticSpec, params: SBSCParams, sigmas: Sequence[float],
                repeats: int = 10) -> list[SweepRow]:
    """Accuracy and NMI at each noise level, ``repeats`` fresh data sets per level.

    Repeat ``r`` uses data seed ``base.seed + r`` and pipeline seed
    ``params.seed + r``, so levels share their random draws.
    """
    rows = []
    for s in sigmas:
        results = [_evaluate(replace(base, sigma=float(s), seed=base.seed + r),
                             replace(params, seed=params.seed + r))
                   for r in range(repeats)]
        rows.append(_summarize(s, results))
    return rows


def size_sweep(base: SyntheticSpec, params: SBSCParams, per_cluster: Sequence[int],
               repeats: int = 1) -> list[SweepRow]:
    """Runtime (and accuracy) as the per-cluster count grows; ``level`` is N."""
    if list(per_cluster) != sorted(set(per_cluster)):
        raise ValueError("per-cluster counts must be strictly increasing")
    rows = []
    for c in per_cluster:
        spec = replace(base, counts=tuple([int(c)] * base.K))
        results = [_evaluate(replace(spec, seed=base.seed + r),
                             replace(params, seed=params.seed + r))
                   for r in range(repeats)]
        rows.append(_summarize(spec.N, results))
    return rows


def loglog_slope(levels, runtimes) -> float:
    """Least-squares slope of log(runtime) against log(level)."""
    x = np.log(np.asarray(levels, dtype=np.float64))
    y = np.log(np.asarray(runtimes, dtype=np.float64))
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])
