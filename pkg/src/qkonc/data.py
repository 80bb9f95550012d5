"""Dataset loading, preprocessing to a target width, and seeded splits."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .simcore import hermitian_eig

__all__ = [
    "Dataset",
    "SplitIndices",
    "PreprocessConfig",
    "load_csv",
    "make_synthetic",
    "standardize",
    "pca_reduce",
    "augment_pairwise",
    "preprocess",
    "Lcg64",
    "seeded_permutation",
    "make_splits",
    "subsample_indices",
]

DEFAULT_RATIOS = (0.6, 0.2, 0.2)


@dataclass
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str] = field(default_factory=list)
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array")
        if self.features.shape[0] != self.labels.size:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.size} labels"
            )
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite values")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.features.shape[1])]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(
            self.name, self.features[idx], self.labels[idx], list(self.feature_names), list(self.class_names)
        )


@dataclass(frozen=True)
class PreprocessConfig:
    target_d: int
    standardize: bool = True

    def __post_init__(self):
        if self.target_d < 1:
            raise ValueError("target_d must be >= 1")


def load_csv(path, label_column: str, positive_label: str | None = None, name: str | None = None) -> Dataset:
    """Read a comma-separated file with a header row.

    Every column other than ``label_column`` must be numeric. Labels become
    contiguous ids in order of first appearance; with ``positive_label`` the
    labels are binarized (``positive_label`` -> 1, everything else -> 0).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not found in header {header}")
    li = header.index(label_column)
    feat_cols = [i for i in range(len(header)) if i != li]
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")

    X = np.empty((len(body), len(feat_cols)))
    raw_labels = []
    for r, row in enumerate(body):
        line = r + 2
        if len(row) != len(header):
            raise ValueError(f"{path}: row {line} has {len(row)} cells, header has {len(header)}")
        for k, c in enumerate(feat_cols):
            cell = row[c].strip()
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(f"{path}: row {line}, column {header[c]!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}: row {line}, column {header[c]!r}: non-finite value {cell!r}")
            X[r, k] = v
        raw_labels.append(row[li].strip())

    if positive_label is not None:
        y = np.array([1 if v == str(positive_label) else 0 for v in raw_labels])
        class_names = ["other", str(positive_label)]
    else:
        order: dict[str, int] = {}
        for v in raw_labels:
            order.setdefault(v, len(order))
        y = np.array([order[v] for v in raw_labels])
        class_names = list(order)
    return Dataset(name or path.stem, X, y, [header[c] for c in feat_cols], class_names)


def make_synthetic(
    kind: str, n: int, noise: float = 0.1, seed: int = 0, n_features: int = 8
) -> Dataset:
    """Balanced binary toy data in ``n_features`` dimensions.

    ``gaussian_blobs`` places the classes at ``-1`` and ``+1`` in every
    coordinate with isotropic Gaussian noise. ``two_moons_like`` draws two
    interleaved half circles and embeds the plane in ``n_features`` dimensions
    with a fixed seeded orthonormal map before adding noise.
    """
    if n < 4:
        raise ValueError("synthetic datasets need n >= 4")
    if n_features < 2:
        raise ValueError("n_features must be >= 2")
    rng = np.random.default_rng(seed)
    n0 = (n + 1) // 2
    n1 = n // 2
    y = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])

    if kind == "gaussian_blobs":
        centers = np.where(y[:, None] == 1, 1.0, -1.0) * np.ones((1, n_features))
        X = centers + noise * rng.standard_normal((n, n_features))
    elif kind == "two_moons_like":
        t0 = np.linspace(0.0, np.pi, n0)
        t1 = np.linspace(0.0, np.pi, n1)
        plane = np.concatenate(
            [
                np.column_stack([np.cos(t0), np.sin(t0)]),
                np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)]),
            ]
        )
        basis, _ = np.linalg.qr(rng.standard_normal((n_features, 2)))
        X = plane @ basis.T + noise * rng.standard_normal((n, n_features))
    else:
        raise ValueError(f"unknown synthetic dataset kind {kind!r}")

    perm = rng.permutation(n)
    return Dataset(f"{kind}", X[perm], y[perm], class_names=["0", "1"])


def standardize(X) -> np.ndarray:
    """Zero mean, unit sample standard deviation (``ddof=1``) per column; constant columns become 0."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardize needs a 2-D array with at least two rows")
    mean = X.mean(axis=0)
    Xc = X - mean
    std = Xc.std(axis=0, ddof=1)
    scale = np.maximum(1.0, np.abs(mean))
    const = std <= 1e-12 * scale
    out = np.zeros_like(Xc)
    out[:, ~const] = Xc[:, ~const] / std[~const]
    return out


def pca_reduce(X, target_d: int) -> np.ndarray:
    """Project centered ``X`` on the top ``target_d`` sample-covariance eigenvectors.

    Each component is signed so that its largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if n < 2:
        raise ValueError("PCA needs at least two rows")
    if target_d > p:
        raise ValueError(f"cannot reduce {p} features to {target_d}; augment instead")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (n - 1)
    es = hermitian_eig(0.5 * (cov + cov.T))
    V = es.eigenvectors[:, :target_d].real.copy()
    lead = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[lead, np.arange(target_d)])
    signs[signs == 0] = 1.0
    return Xc @ (V * signs)


def augment_pairwise(X, target_d: int) -> np.ndarray:
    """Append products ``x_a * x_b`` (``a < b``, lexicographic) up to ``target_d`` columns, then restandardize."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if target_d <= p:
        raise ValueError(f"augmentation needs target_d > {p}")
    reachable = p + p * (p - 1) // 2
    if target_d > reachable:
        raise ValueError(f"{p} features reach at most width {reachable} with pairwise products")
    extra = []
    for a in range(p):
        for b in range(a + 1, p):
            if p + len(extra) == target_d:
                break
            extra.append(X[:, a] * X[:, b])
    return standardize(np.column_stack([X] + extra))


def preprocess(X, config: PreprocessConfig | int) -> np.ndarray:
    """Standardize, bring the width to ``target_d`` (PCA or products), standardize again."""
    if not isinstance(config, PreprocessConfig):
        config = PreprocessConfig(int(config))
    X = np.asarray(X, dtype=float)
    d = config.target_d
    Z = standardize(X) if config.standardize else X
    p = Z.shape[1]
    if p > d:
        Z = pca_reduce(Z, d)
    elif p < d:
        Z = augment_pairwise(Z, d)
    return standardize(Z) if config.standardize else Z


class Lcg64:
    """64-bit linear congruential generator (MMIX constants), output = high 32 bits.

    Used instead of numpy's generators so persisted split indices can be
    regenerated bit-for-bit on any platform or language.
    """

    A = 6364136223846793005
    C = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = (int(seed) ^ 0x9E3779B97F4A7C15) & self.MASK
        self.next32()

    def next32(self) -> int:
        self.state = (self.A * self.state + self.C) & self.MASK
        return self.state >> 32

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling."""
        limit = (1 << 32) - ((1 << 32) % bound)
        while True:
            v = self.next32()
            if v < limit:
                return v % bound


def seeded_permutation(n: int, seed: int) -> np.ndarray:
    """Fisher-Yates shuffle of ``range(n)`` driven by :class:`Lcg64`."""
    rng = Lcg64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=int)


@dataclass(frozen=True)
class SplitIndices:
    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]
    seed: int
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "ratios": list(self.ratios),
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SplitIndices":
        return cls(
            tuple(int(i) for i in data["train"]),
            tuple(int(i) for i in data["val"]),
            tuple(int(i) for i in data["test"]),
            int(data["seed"]),
            tuple(float(r) for r in data["ratios"]),
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path) -> "SplitIndices":
        return cls.from_dict(json.loads(Path(path).read_text()))


def make_splits(n: int, seed: int, ratios: Sequence[float] = DEFAULT_RATIOS) -> SplitIndices:
    """Shuffle with :func:`seeded_permutation`, then slice: train and val sizes are floored, test takes the rest."""
    if n < 3:
        raise ValueError("need n >= 3 to split")
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three nonnegative numbers summing to 1, got {ratios}")
    perm = seeded_permutation(n, seed)
    n_train = int(math.floor(ratios[0] * n + 1e-9))
    n_val = int(math.floor(ratios[1] * n + 1e-9))
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) <= 0:
        raise ValueError(f"split sizes {(n_train, n_val, n_test)} for n={n} leave an empty split")
    return SplitIndices(
        tuple(int(i) for i in perm[:n_train]),
        tuple(int(i) for i in perm[n_train : n_train + n_val]),
        tuple(int(i) for i in perm[n_train + n_val :]),
        int(seed),
        ratios,
    )


def subsample_indices(n: int, n_max: int, seed: int) -> np.ndarray:
    """The first ``n_max`` entries of the seeded shuffle, in ascending order (all rows if ``n <= n_max``)."""
    if n <= n_max:
        return np.arange(n)
    return np.sort(seeded_permutation(n, seed)[:n_max])
