"""K-means cluster sampling: keep the same fraction of every cluster."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_X_y

from .core import ConfigError, InvariantError, make_rng
from .streams import minmax_scale


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 8
    max_iters: int = 100
    tol: float = 1e-4
    init: str = "kmeanspp"
    seed: int | None = 0
    scale: str = "minmax"

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.init not in ("kmeanspp", "random"):
            raise ConfigError(f"init must be 'kmeanspp' or 'random', got {self.init!r}")
        if self.scale not in ("minmax", "none"):
            raise ConfigError(f"scale must be 'minmax' or 'none', got {self.scale!r}")


@dataclass
class ClusterModel:
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)
    n_iter: int = 0
    collapsed_from: int | None = None

    @property
    def k(self) -> int:
        return len(self.centroids)

    def cluster_sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


def _sq_dists(X: np.ndarray, C: np.ndarray, chunk: int = 16384) -> np.ndarray:
    # explicit differences rather than the |x|^2 - 2xc + |c|^2 expansion: no cancellation error
    out = np.empty((len(X), len(C)))
    for start in range(0, len(X), chunk):
        block = X[start:start + chunk]
        out[start:start + chunk] = ((block[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    return out


def _init_centroids(X, k, init, rng) -> np.ndarray:
    n = len(X)
    if init == "random":
        return X[rng.choice(n, size=k, replace=False)].copy()
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            break
        idx = rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.asarray(centers, dtype=float)


def kmeans_fit(points, cfg: KMeansConfig = KMeansConfig()) -> ClusterModel:
    """Lloyd's algorithm with k-means++ (or random) seeding.

    Points are clustered as given; scaling is the caller's job. Inertia is
    recorded after every assignment step and must never increase. If fewer
    than ``k`` distinct points exist, ``k`` collapses to that number with a
    warning.
    """
    cfg.validate()
    X = check_array(points, dtype=float)
    n = len(X)
    if cfg.k > n:
        raise ConfigError(f"k={cfg.k} exceeds the number of points ({n})")
    k = cfg.k
    n_distinct = len(np.unique(X, axis=0))
    collapsed_from = None
    if n_distinct < k:
        warnings.warn(f"only {n_distinct} distinct points; k collapses from {k} to {n_distinct}",
                      RuntimeWarning, stacklevel=2)
        collapsed_from, k = k, n_distinct
    rng = make_rng(cfg.seed)
    if cfg.init == "random":
        uniq = np.unique(X, axis=0)
        C = uniq[rng.choice(len(uniq), size=k, replace=False)].astype(float)
    else:
        C = _init_centroids(X, k, cfg.init, rng)
    history: list[float] = []
    assign = np.zeros(n, dtype=np.int64)
    n_iter = 0
    for n_iter in range(1, cfg.max_iters + 1):
        d2 = _sq_dists(X, C)
        assign = d2.argmin(axis=1)
        point_d2 = d2[np.arange(n), assign]
        inertia = float(point_d2.sum())
        if history and inertia > history[-1] * (1 + 1e-12) + 1e-12:
            raise InvariantError(f"k-means inertia increased at iteration {n_iter}: {history[-1]} -> {inertia}")
        history.append(inertia)
        counts = np.bincount(assign, minlength=k)
        new_C = np.zeros_like(C)
        np.add.at(new_C, assign, X)
        nonempty = counts > 0
        new_C[nonempty] /= counts[nonempty, None]
        # re-seed each empty cluster at the point currently farthest from its centroid
        for j in np.flatnonzero(~nonempty):
            far = int(point_d2.argmax())
            new_C[j] = X[far]
            point_d2[far] = 0.0
        shift = float(np.sqrt(((new_C - C) ** 2).sum(axis=1)).max())
        C = new_C
        if shift < cfg.tol:
            break
    d2 = _sq_dists(X, C)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), assign].sum())
    if inertia > history[-1] * (1 + 1e-12) + 1e-12:
        raise InvariantError("k-means inertia increased on the final assignment")
    history.append(inertia)
    return ClusterModel(C, assign, inertia, history, n_iter, collapsed_from)


def round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def proportional_allocation(sizes, fraction: float) -> list[int]:
    """Per-cluster sample counts summing to round(fraction * n) by largest remainder.

    Ties in the fractional part go to the lower cluster index.
    """
    quotas = [fraction * s for s in sizes]
    counts = [math.floor(q) for q in quotas]
    target = round_half_up(fraction * sum(sizes))
    remainder = target - sum(counts)
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order:
        if remainder <= 0:
            break
        if counts[i] < sizes[i]:
            counts[i] += 1
            remainder -= 1
    if remainder != 0:
        raise InvariantError("largest-remainder allocation did not reach the target size")
    return counts


@dataclass
class SampleResult:
    indices: np.ndarray
    cluster_model: ClusterModel
    per_cluster_sizes: list[int]
    per_cluster_counts: list[int]


def cluster_sample_indices(X, fraction: float, cfg: KMeansConfig = KMeansConfig()) -> SampleResult:
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"fraction must be in (0, 1], got {fraction}")
    X = check_array(X, dtype=float)
    n = len(X)
    if fraction * n < 1:
        raise ConfigError(f"fraction {fraction} of {n} records selects nothing")
    cfg.validate()
    Z = minmax_scale(X) if cfg.scale == "minmax" else X
    model = kmeans_fit(Z, cfg)
    sizes = model.cluster_sizes()
    counts = proportional_allocation(sizes, fraction)
    rng = make_rng(cfg.seed)
    chosen = []
    for j, (size, c) in enumerate(zip(sizes, counts)):
        members = np.flatnonzero(model.assignments == j)
        if c == size:
            chosen.append(members)
        elif c:
            chosen.append(rng.choice(members, size=c, replace=False))
    idx = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    return SampleResult(idx, model, sizes, counts)


def cluster_sample(data, fraction: float, cfg: KMeansConfig = KMeansConfig()):
    """Sample a list of ``LabeledInstance`` records, keeping their original order."""
    data = list(data)
    X = np.asarray([r.features for r in data], dtype=float)
    res = cluster_sample_indices(X, fraction, cfg)
    return [data[i] for i in res.indices.tolist()]


class KMeansClusterSampler(BaseEstimator):
    """Estimator wrapper: ``fit_resample(X, y)`` returns the sampled rows.

    Parameters mirror :class:`KMeansConfig`; ``sample_indices_`` and
    ``cluster_model_`` are set after fitting.
    """

    def __init__(self, fraction=0.01, n_clusters=8, max_iter=100, tol=1e-4, init="kmeanspp",
                 scale="minmax", random_state=0):
        self.fraction = fraction
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.tol = tol
        self.init = init
        self.scale = scale
        self.random_state = random_state

    def _config(self) -> KMeansConfig:
        return KMeansConfig(self.n_clusters, self.max_iter, self.tol, self.init, self.random_state, self.scale)

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        res = cluster_sample_indices(X, self.fraction, self._config())
        self.sample_indices_ = res.indices
        self.cluster_model_ = res.cluster_model
        self.cluster_sizes_ = res.per_cluster_sizes
        self.cluster_counts_ = res.per_cluster_counts
        return self

    def fit_resample(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        self.fit(X)
        return X[self.sample_indices_], np.asarray(y)[self.sample_indices_]
