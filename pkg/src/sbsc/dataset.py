"""Data container, column normalization, synthetic generation and CSV I/O.

Points are stored column-major: ``points`` has shape ``(D, N)`` and column
``i`` is the i-th observation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidSpec, ParseError, ZeroColumn

ZERO_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Unit-norm points in R^D with optional 0-based ground-truth labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    # orthonormal bases of the generating subspaces (synthetic data only)
    bases: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise InvalidSpec("points must be a 2-D (D, N) array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (pts.shape[1],):
                raise InvalidSpec(
                    f"labels has shape {lab.shape}, expected ({pts.shape[1]},)")
            if lab.size and lab.min() < 0:
                raise InvalidSpec("labels must be non-negative")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def D(self) -> int:
        return self.points.shape[0]

    @property
    def N(self) -> int:
        return self.points.shape[1]

    @property
    def K(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.points[:, idx], labels)


def normalize_columns(matrix) -> np.ndarray:
    """Scale every column to unit Euclidean norm.

    Raises
    ------
    ZeroColumn
        If some column has norm <= 1e-12.
    """
    X = np.asarray(matrix, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms <= ZERO_NORM_TOL)
    if bad.size:
        raise ZeroColumn(bad[0])
    return X / norms


@dataclass(frozen=True)
class SyntheticSpec:
    """Union-of-subspaces generator settings.

    ``counts`` holds the number of points per cluster, ``sigma`` the noise
    scale. Every subspace has the same dimension ``d``.
    """

    K: int
    d: int
    D: int
    counts: tuple
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        object.__setattr__(self, "counts", counts)
        if self.K < 1 or len(counts) != self.K:
            raise InvalidSpec(f"need K={self.K} >= 1 cluster counts, got {len(counts)}")
        if not 1 <= self.d <= self.D:
            raise InvalidSpec(f"need 1 <= d <= D, got d={self.d}, D={self.D}")
        if min(counts) < 1:
            raise InvalidSpec("all cluster counts must be >= 1")
        if not (self.sigma >= 0 and np.isfinite(self.sigma)):
            raise InvalidSpec("sigma must be finite and >= 0")

    @classmethod
    def balanced(cls, K, d, D, per_cluster, sigma=0.0, seed=0):
        return cls(K=K, d=d, D=D, counts=(per_cluster,) * K, sigma=sigma, seed=seed)

    @property
    def N(self) -> int:
        return sum(self.counts)


def random_basis(rng: np.random.Generator, D: int, d: int) -> np.ndarray:
    """Orthonormal D x d basis from the QR factor of a Gaussian matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((D, d)))
    # sign fix makes the draw Haar-distributed
    return Q * np.sign(np.diag(R))


def _draw_raw(rng, U, count, sigma):
    """Un-normalized points zeta * U a + e_hat, plus the pieces used to build them."""
    D, d = U.shape
    a = rng.standard_normal((d, count))
    a /= np.linalg.norm(a, axis=0)
    zeta = np.sqrt(rng.chisquare(d, size=count))
    raw = U @ (a * zeta)
    if sigma > 0:
        noise = rng.normal(0.0, np.sqrt(d) * sigma, size=(D, count))
        raw += noise
    else:
        noise = np.zeros((D, count))
    return raw, zeta, noise


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draw a labelled union-of-subspaces data set.

    Cluster k gets a random orthonormal basis ``U_k``; each point is
    ``zeta * U_k a + e_hat`` normalized to unit length, with ``a`` uniform on
    the unit sphere of R^d, ``zeta**2 ~ chi2(d)`` and ``e_hat ~ N(0, d sigma^2 I)``.
    Output is fully determined by ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    bases = tuple(random_basis(rng, spec.D, spec.d) for _ in range(spec.K))
    blocks, labels = [], []
    for k, (U, count) in enumerate(zip(bases, spec.counts)):
        raw, _, _ = _draw_raw(rng, U, count, spec.sigma)
        blocks.append(raw)
        labels.append(np.full(count, k, dtype=np.int64))
    points = normalize_columns(np.concatenate(blocks, axis=1))
    return Dataset(points, np.concatenate(labels), bases=bases)


def noise_ratio_samples(D: int, d: int, size: int, seed: int = 0) -> np.ndarray:
    """Draw ``||e||^2 / D`` where ``e = e_hat / (sigma zeta)`` is the rescaled noise.

    Uses the same draws as ``generate_synthetic``; the values should follow
    an F(D, d) distribution.
    """
    rng = np.random.default_rng(seed)
    U = random_basis(rng, D, d)
    _, zeta, noise = _draw_raw(rng, U, size, sigma=1.0)
    e = noise / zeta
    return np.sum(e * e, axis=0) / D


# ---------------------------------------------------------------- CSV I/O


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _normalize_labels(raw: np.ndarray) -> np.ndarray:
    labels = raw.astype(np.int64)
    # 1-based files: no zero present and the smallest label is 1
    if labels.size and labels.min() == 1:
        labels = labels - 1
    return labels


def load_dataset(path, format: str = "csv-rows") -> Dataset:
    """Read a CSV file into a normalized :class:`Dataset`.

    ``csv-rows``: one point per row. A header row is optional; when it names
    its last column ``label`` that column holds integer labels.

    ``csv-cols``: one point per column. An optional final row whose first
    cell is ``label`` holds the labels.

    Labels given 1-based are shifted to 0-based.
    """
    path = Path(path)
    if format not in ("csv-rows", "csv-cols"):
        raise ValueError(f"unknown format {format!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh))
                if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(0, "empty file")
    if format == "csv-rows":
        return _load_rows(rows)
    return _load_cols(rows)


def _load_rows(rows) -> Dataset:
    has_label = False
    first_line, first = rows[0]
    if not all(_is_number(c) for c in first):
        has_label = first[-1].strip().lower() == "label"
        width = len(first)
        rows = rows[1:]
        if not rows:
            raise ParseError(first_line, "header without data rows")
    else:
        width = len(first)
    values = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(line, f"expected {width} fields, got {len(cells)}")
        try:
            values[r] = [float(c) for c in cells]
        except ValueError:
            raise ParseError(line, "non-numeric field") from None
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values).all(axis=1))[0])
        raise ParseError(rows[bad][0], "non-finite value")
    labels = None
    if has_label:
        labels = _normalize_labels(values[:, -1])
        values = values[:, :-1]
    return Dataset(normalize_columns(values.T), labels)


def _load_cols(rows) -> Dataset:
    labels = None
    last_line, last = rows[-1]
    if last[0].strip().lower() == "label":
        try:
            labels = _normalize_labels(np.array([float(c) for c in last[1:]]))
        except ValueError:
            raise ParseError(last_line, "non-numeric label") from None
        rows = rows[:-1]
    if not rows:
        raise ParseError(last_line, "no coordinate rows")
    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (line, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(line, f"expected {width} fields, got {len(cells)}")
        try:
            values[r] = [float(c) for c in cells]
        except ValueError:
            raise ParseError(line, "non-numeric field") from None
    if labels is not None and labels.size != width:
        raise ParseError(last_line, "label row length does not match point count")
    return Dataset(normalize_columns(values), labels)


def save_dataset(data: Dataset, path, labels: Optional[Sequence[int]] = None) -> None:
    """Write points one per row, with a ``label`` column when labels exist.

    Floats use ``repr`` so that identical data gives byte-identical files.
    """
    labels = data.labels if labels is None else np.asarray(labels)
    header = [f"x{j}" for j in range(data.D)]
    if labels is not None:
        header.append("label")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(data.N):
            row = [repr(float(v)) for v in data.points[:, i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            w.writerow(row)
