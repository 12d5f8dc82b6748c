"""Probability bounds for sub-cluster preservation, correct neighbourhoods and
out-of-sample classification, with Monte-Carlo checks of the supporting
concentration inequalities.

Conventions: ``(x)_+ = max(x, 0)`` and ``(x)_- = max(-x, 0)``, so both parts
are nonnegative. Principal-angle cosines are kept in descending order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .exceptions import AssumptionViolated, BadConstants

RHO = 0.9


# ----------------------------------------------------------- geometry


def principal_cosines(U1, U2) -> np.ndarray:
    """Cosines of the principal angles between span(U1) and span(U2), descending."""
    s = np.linalg.svd(np.asarray(U1).T @ np.asarray(U2), compute_uv=False)
    return np.clip(np.sort(s)[::-1], 0.0, 1.0)


def pairwise_cosines(bases) -> dict:
    return {(j, k): principal_cosines(bases[j], bases[k])
            for j, k in combinations(range(len(bases)), 2)}


def maximal_affinity(bases) -> np.ndarray:
    """Row k is the entrywise max of the cosine vectors of subspace k against all others."""
    K = len(bases)
    d = np.asarray(bases[0]).shape[1]
    out = np.zeros((K, d))
    for (j, k), cos in pairwise_cosines(bases).items():
        out[j] = np.maximum(out[j], cos)
        out[k] = np.maximum(out[k], cos)
    return out


def has_correct_neighborhood(dist, groups) -> np.ndarray:
    """Per sub-cluster: is every same-group distance below every cross-group distance?

    ``dist`` is the n x n sub-cluster distance matrix and ``groups`` the
    subspace each sub-cluster concentrates around.
    """
    dist = np.asarray(dist, dtype=np.float64)
    groups = np.asarray(groups)
    n = groups.size
    ok = np.ones(n, dtype=bool)
    for i in range(n):
        same = (groups == groups[i])
        same[i] = False
        other = groups != groups[i]
        if same.any() and other.any():
            ok[i] = dist[i, same].max() < dist[i, other].min()
    return ok


# ----------------------------------------------------------- constants


def split_parts(lambdas, g_sq) -> tuple[np.ndarray, np.ndarray]:
    """``r_i = (g^2 - lambda_i^2)_+`` and ``s_i = (g^2 - lambda_i^2)_-``."""
    diff = g_sq - np.asarray(lambdas, dtype=np.float64) ** 2
    return np.maximum(diff, 0.0), np.maximum(-diff, 0.0)


def separation_T(g1: float, g2: float = 0.0) -> float:
    return (4 * g2 + 2 * g2**2) / (1 - g2) + g1 * (1 + g2) / (1 - g2)


def epsilon_from_constants(c1: float, c2: float, c3: float, d: int) -> float:
    """``(1 - 1/c3) sqrt(d) / (2 c1 + sqrt(4 c1^2 + 2 c2))``."""
    if not (c1 > 1 and c2 > 1 and c3 > 1) or d < 1:
        raise BadConstants(f"need c1, c2, c3 > 1 and d >= 1, got {c1}, {c2}, {c3}, {d}")
    return (1 - 1 / c3) * math.sqrt(d) / (2 * c1 + math.sqrt(4 * c1**2 + 2 * c2))


def tightest_constants(affinity_rows, g_sq_values: Sequence[float]):
    """Smallest admissible ``c1, c2`` and a ``c3`` just under its supremum.

    Each row of ``affinity_rows`` is a maximal affinity vector; the
    inequalities must hold for every row and every threshold in
    ``g_sq_values``. Returns ``None`` if no constants exist.
    """
    rows = np.atleast_2d(affinity_rows)
    d = rows.shape[1]
    c1 = c2 = 1.0
    c3 = math.inf
    for g_sq in g_sq_values:
        for lam in rows:
            r, s = split_parts(lam, g_sq)
            R, S = r.sum(), s.sum()
            if R <= 0 or not np.sum(r**2) > np.sum(s**2):
                return None
            c1 = max(c1, float(math.sqrt(d * np.sum(r**2)) / R))
            c2 = max(c2, float(d / R))
            if S > 0:
                c3 = min(c3, float(R / S))
    if c3 <= 1:
        return None
    c1 = max(c1, float(np.nextafter(1.0, 2.0)))
    c2 = max(c2, float(np.nextafter(1.0, 2.0)))
    # the c3 inequality is strict
    c3 = c3 * (1 - 1e-9) if math.isfinite(c3) else 1e12
    return c1, c2, c3


# ----------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class MCCheck:
    epsilon: float
    bound: float
    empirical: float
    stderr: float
    trials: int

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + 3 * self.stderr


def _tail_estimate(hits: int, trials: int) -> tuple[float, float]:
    p = hits / trials
    return p, math.sqrt(p * (1 - p) / trials)


def sample_sphere(rng, d: int, size: int) -> np.ndarray:
    z = rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def lemma1_epsilon(lambdas, g1: float) -> float:
    """Exponent of the bound ``P[sum (lambda_i b_i)^2 >= g1^2] <= 2 exp(-eps^2)``."""
    r, s = split_parts(lambdas, g1 * g1)
    diff = r.sum() - s.sum()
    # rounding in g1^2 must not make an equality look admissible
    if not diff > 1e-12 * (r.sum() + s.sum()):
        raise AssumptionViolated([f"sum r = {r.sum():.4g} must exceed sum s = {s.sum():.4g}"])
    a = math.sqrt(np.sum(r**2)) + math.sqrt(np.sum(s**2))
    s1 = s.max()
    return float(diff / (a + math.sqrt(a * a + 2 * s1 * diff)))


def lemma1_check(lambdas, g1: float, trials: int = 100_000, seed: int = 0) -> MCCheck:
    """Compare the sphere-sampling tail with ``2 exp(-eps^2)``."""
    lam = np.sort(np.asarray(lambdas, dtype=np.float64))[::-1]
    if lam.min() < 0 or lam.max() > 1:
        raise AssumptionViolated(["cosines must lie in [0, 1]"])
    eps = lemma1_epsilon(lam, g1)
    rng = np.random.default_rng(seed)
    hits = 0
    for size in _chunks(trials):
        b = sample_sphere(rng, lam.size, size)
        hits += int(np.count_nonzero(np.sum((lam * b) ** 2, axis=1) >= g1 * g1))
    p, se = _tail_estimate(hits, trials)
    return MCCheck(eps, 2 * math.exp(-eps * eps), p, se, trials)


def corollary1_epsilon(m: float, n: float, q: float) -> float:
    if m < 2 or n < 2 or q < 1:
        raise BadConstants(f"need m, n >= 2 and q >= 1, got {m}, {n}, {q}")
    a = math.sqrt(m) + q * m / math.sqrt(n)
    return 0.5 * (-a + math.sqrt(a * a + 2 * m * (q - 1)))


def corollary1_check(m: int, n: int, q: float, trials: int = 100_000,
                     seed: int = 0) -> MCCheck:
    """Compare the F(m, n) upper tail at ``q`` with ``2 exp(-eps^2)``."""
    eps = corollary1_epsilon(m, n, q)
    rng = np.random.default_rng(seed)
    hits = sum(int(np.count_nonzero(rng.f(m, n, size) >= q)) for size in _chunks(trials))
    p, se = _tail_estimate(hits, trials)
    return MCCheck(eps, 2 * math.exp(-eps * eps), p, se, trials)


def a3_quantile_condition(T: float, d: int, d_max: int, N_j: int, rho: float = RHO) -> bool:
    """``2 (1 - T^2)^((d-1)/2) >= sqrt(2 pi d) d_max / N_j^rho``."""
    if not 0 <= T < 1:
        return False
    return 2 * (1 - T * T) ** ((d - 1) / 2) >= math.sqrt(2 * math.pi * d) * d_max / N_j**rho


def max_separation(d: int, d_max: int, N_j: int, rho: float = RHO) -> float:
    """Largest T with ``F(T^2) <= 1 - d_max / N_j^rho`` for F the Beta(1/2, (d-1)/2) cdf."""
    level = 1 - d_max / N_j**rho
    if level <= 0:
        return 0.0
    return float(math.sqrt(stats.beta.ppf(level, 0.5, (d - 1) / 2)))


def lemma3_bound(N_j: int, d_max: int) -> float:
    return (N_j - d_max) / (d_max * (N_j + 1) * (N_j**0.1 - 1) ** 2)


def lemma3_check(T: float, d: int, d_max: int, N_j: int, trials: int = 100_000,
                 seed: int = 0, method: str = "order") -> MCCheck:
    """Tail of the ``(N_j - d_max)``-th order statistic of ``N_j - 1`` Beta(1/2, (d-1)/2) draws.

    ``method="order"`` samples the order statistic exactly through its
    uniform counterpart ``U_(k) ~ Beta(k, N_j - k)``; ``method="brute"``
    draws the full sample and partitions it.
    """
    k = N_j - d_max
    a, b = 0.5, (d - 1) / 2
    rng = np.random.default_rng(seed)
    hits = 0
    if method == "order":
        cut = stats.beta.cdf(T * T, a, b)
        for size in _chunks(trials):
            hits += int(np.count_nonzero(rng.beta(k, N_j - k, size) <= cut))
    elif method == "brute":
        per = max(1, 2_000_000 // max(N_j - 1, 1))
        for size in _chunks(trials, per):
            draws = rng.beta(a, b, size=(size, N_j - 1))
            kth = np.partition(draws, k - 1, axis=1)[:, k - 1]
            hits += int(np.count_nonzero(kth <= T * T))
    else:
        raise ValueError(f"unknown method {method!r}")
    p, se = _tail_estimate(hits, trials)
    return MCCheck(float("nan"), lemma3_bound(N_j, d_max), p, se, trials)


def beta_quantile_check(d: int, d_max: int, N_j: int, T: float = 0.0,
                        trials: int = 100_000, seed: int = 0) -> bool:
    """True when the quantile condition holds for ``T`` and the order-statistic
    tail stays within its bound (Monte Carlo, 3 standard errors)."""
    if not a3_quantile_condition(T, d, d_max, N_j):
        return False
    return lemma3_check(T, d, d_max, N_j, trials=trials, seed=seed).passed


def _chunks(total: int, size: int = 200_000):
    done = 0
    while done < total:
        step = min(size, total - done)
        yield step
        done += step


# ----------------------------------------------------------- theorems


@dataclass(frozen=True)
class TheoryParams:
    """Inputs of the three probability bounds.

    ``affinity`` holds one maximal affinity vector per subspace (K x d).
    ``counts`` are the cluster sizes N_j, ``sampled`` the subsampled counts
    n_j. Constants left as ``None`` are derived where possible.
    """

    d: int
    D: int
    counts: tuple
    sampled: tuple
    d_max: int
    affinity: np.ndarray
    g1: float
    g2: float = 0.0
    sigma: float = 0.0
    m: Optional[int] = None
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    q0: Optional[float] = None
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    eta3: Optional[float] = None
    rho: float = RHO

    @property
    def K(self) -> int:
        return len(self.counts)

    @property
    def N(self) -> int:
        return int(sum(self.counts))

    @property
    def n(self) -> int:
        return int(sum(self.sampled))

    @property
    def T(self) -> float:
        return separation_T(self.g1, self.g2)

    @property
    def noiseless(self) -> bool:
        return self.sigma == 0

    def with_constants(self) -> "TheoryParams":
        """Fill missing c1..c3 with the tightest values admissible for g1^2 and 2/5."""
        if None not in (self.c1, self.c2, self.c3):
            return self
        found = tightest_constants(self.affinity, (self.g1**2, 0.4))
        if found is None:
            raise AssumptionViolated(["no admissible c1, c2, c3 for these cosines"])
        c1, c2, c3 = found
        return replace(self, c1=self.c1 or c1, c2=self.c2 or c2, c3=self.c3 or c3)

    @property
    def epsilon(self) -> float:
        tp = self.with_constants()
        return epsilon_from_constants(tp.c1, tp.c2, tp.c3, self.d)

    @classmethod
    def from_bases(cls, bases, counts, sampled, d_max, g1, D=None, **kw):
        bases = [np.asarray(U) for U in bases]
        return cls(d=bases[0].shape[1], D=D or bases[0].shape[0],
                   counts=tuple(int(c) for c in counts),
                   sampled=tuple(int(c) for c in sampled), d_max=int(d_max),
                   affinity=maximal_affinity(bases), g1=float(g1), **kw)


def _noise_tail_term(N, eta):
    if eta is None:
        return math.nan
    return 2 * N / (N ** (1 + eta) - 2)


def _stage_q_check(label, lam, g, D, d, sigma, scale, eta):
    """Shared form of the noise-level conditions on q for Theorems 2 and 3."""
    q = lam * g / (3 * D * math.sqrt(D) * sigma * scale)
    fails = []
    if not q > 1:
        fails.append(f"{label}: q = {q:.4g} must exceed 1")
    else:
        lhs = D * (q - 1) / (2 * (math.sqrt(D) + D * q / math.sqrt(d) + math.sqrt(d)))
        if not lhs > math.sqrt(d * (1 + eta) / 5):
            fails.append(f"{label}: noise condition fails for eta = {eta}")
    return fails


def check_assumptions(tp: TheoryParams) -> tuple[list, list]:
    """Return ``(failures, notes)``.

    Failures concern the constants and separation conditions; notes list
    the growth-rate conditions (d of order log N) that cannot hold at
    small N and are reported without failing.
    """
    fails, notes = [], []
    d, D = tp.d, tp.D
    if 5 * math.log(tp.N) > d:
        notes.append(f"A1: d = {d} is below 5 log N = {5 * math.log(tp.N):.3g}")
    try:
        c = tp.with_constants()
    except AssumptionViolated as exc:
        return exc.failed, notes
    for name in ("c1", "c2", "c3"):
        if not getattr(c, name) > 1:
            fails.append(f"A3: {name} must exceed 1")
    if not 0 <= tp.g2 < 1:
        fails.append("A3: g2 must lie in [0, 1)")
        return fails, notes
    T = tp.T
    for j, N_j in enumerate(tp.counts):
        if not a3_quantile_condition(T, d, tp.d_max, N_j, tp.rho):
            fails.append(f"A3: quantile condition fails for cluster {j} (T = {T:.4g})")
    for label, g_sq in (("A3", tp.g1**2), ("A4", 0.4)):
        for j, lam in enumerate(np.atleast_2d(tp.affinity)):
            r, s = split_parts(lam, g_sq)
            R, S = r.sum(), s.sum()
            if not R >= math.sqrt(d * np.sum(r**2)) / c.c1 - 1e-12:
                fails.append(f"{label}: c1 inequality fails for cluster {j}")
            if not R >= d / c.c2 - 1e-12:
                fails.append(f"{label}: c2 inequality fails for cluster {j}")
            if not np.sum(r**2) > np.sum(s**2):
                fails.append(f"{label}: sum r^2 <= sum s^2 for cluster {j}")
            if not R > c.c3 * S:
                fails.append(f"{label}: c3 inequality fails for cluster {j}")
    if not tp.noiseless:
        s2 = tp.sigma**2
        ratio = tp.g2**2 / (D * s2)
        if tp.eta1 is None:
            fails.append("A3: eta1 is required when sigma > 0")
        elif not ratio > 1:
            fails.append("A3: g2^2 / (D sigma^2) must exceed 1")
        else:
            lhs = D * (ratio - 1) / (math.sqrt(D) + tp.g2**2 / (tp.sigma * math.sqrt(d))
                                     + math.sqrt(D) * tp.g2**2 / (math.sqrt(d) * s2))
            if not lhs >= math.sqrt(d * (1 + tp.eta1) / 5):
                fails.append("A3: noise-norm condition fails for eta1")
        if tp.q0 is None or tp.eta2 is None:
            fails.append("A6: q0 and eta2 are required when sigma > 0")
        else:
            lam = 1 / (3 * tp.q0 * math.sqrt(15 * d * (tp.d_max + 1)))
            g = 1 / (3 * math.sqrt(15 * D * (tp.d_max + 1)))
            fails += _stage_q_check("A6", lam, g, D, d, tp.sigma, tp.d_max + 1, tp.eta2)
        if tp.m is not None:
            if tp.q0 is None or tp.eta3 is None:
                fails.append("A9: q0 and eta3 are required when sigma > 0")
            else:
                lam = 1 / (tp.q0 * math.sqrt(d * tp.m))
                g = 1 / math.sqrt(D * tp.m)
                fails += _stage_q_check("A9", lam, g, D, d, tp.sigma, tp.m, tp.eta3)
    return fails, notes


def theorem1_bound(tp: TheoryParams) -> float:
    """Lower bound on the probability that every sub-cluster is pure.

    With ``sigma == 0`` the noiseless form applies: order-statistic
    exponent 2/3 and no noise-norm term.
    """
    eps = tp.epsilon
    expo = 2 / 3 if tp.noiseless else 1 / 10
    order = sum(n_j * (N_j - tp.d_max) / (tp.d_max * (N_j + 1) * (N_j**expo - 1) ** 2)
                for n_j, N_j in zip(tp.sampled, tp.counts))
    p = 1 - order - 2 * (tp.K - 1) * tp.n * math.exp(-eps * eps)
    if not tp.noiseless:
        p -= _noise_tail_term(tp.N, tp.eta1)
    return p


def theorem2_bound(tp: TheoryParams) -> float:
    """Lower bound on the probability of the correct neighbourhood property."""
    eps = tp.epsilon
    n = tp.n
    p = 1 - 4 * n * (n - 1) * math.exp(-eps * eps)
    if not tp.noiseless:
        p -= _noise_tail_term(tp.N, tp.eta2)
    return p


def theorem3_bound(tp: TheoryParams) -> float:
    """Lower bound on the probability of exact out-of-sample labels."""
    eps = tp.epsilon
    p = 1 - 2 * (tp.K - 1) * (tp.N - tp.n * (tp.d_max + 1)) * math.exp(-eps * eps)
    if not tp.noiseless:
        p -= _noise_tail_term(tp.N, tp.eta3)
    return p


@dataclass
class BoundReport:
    raw: dict
    clamped: dict
    epsilon: float
    params: TheoryParams
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        tp = self.params
        return {
            "raw": self.raw, "clamped": self.clamped, "epsilon": self.epsilon,
            "constants": {k: getattr(tp, k) for k in
                          ("g1", "g2", "c1", "c2", "c3", "q0", "eta1", "eta2", "eta3")},
            "T": tp.T, "failures": self.failures, "notes": self.notes,
        }


def theorem_bounds(tp: TheoryParams, strict: bool = True) -> BoundReport:
    """Evaluate all three bounds; raw values are kept alongside values clamped to [0, 1]."""
    fails, notes = check_assumptions(tp)
    if fails and strict:
        raise AssumptionViolated(fails)
    try:
        tp = tp.with_constants()
    except AssumptionViolated:
        # non-strict: no admissible constants, nothing to evaluate
        nan = {"p1": math.nan, "p2": math.nan, "p3": math.nan}
        return BoundReport(nan, dict(nan), math.nan, tp, fails, notes)
    raw = {"p1": theorem1_bound(tp), "p2": theorem2_bound(tp), "p3": theorem3_bound(tp)}
    clamped = {k: v if math.isnan(v) else min(max(v, 0.0), 1.0) for k, v in raw.items()}
    return BoundReport(raw, clamped, tp.epsilon, tp, fails, notes)


def search_constants(base: TheoryParams, g1_grid=None, g2_grid=(0.0,)) -> BoundReport:
    """Grid search over g1 (and g2) for the largest admissible preserving bound."""
    if g1_grid is None:
        g1_grid = np.round(np.arange(0.05, 1.0, 0.05), 2)
    best = None
    for g2 in g2_grid:
        for g1 in g1_grid:
            cand = replace(base, g1=float(g1), g2=float(g2), c1=None, c2=None, c3=None)
            try:
                rep = theorem_bounds(cand, strict=True)
            except AssumptionViolated:
                continue
            if best is None or rep.raw["p1"] > best.raw["p1"]:
                best = rep
    if best is None:
        raise AssumptionViolated(["no admissible (g1, g2) on the search grid"])
    return best
