"""Class balancing: minority weighting, random and synthetic oversampling,
undersampling, and the combined over/under scheme.

Ratios are minority/majority row counts, where the minority is the less
frequent label (label 1 on ties). Oversamplers keep every input row first, in
input order, and append generated rows; undersamplers return the kept rows
in input order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.spatial.distance import cdist

from .errors import LengthMismatch, TooFewMinority

TECHNIQUES = (
    "class_weight",
    "random_over",
    "random_under",
    "combined",
    "smote",
    "kmeans_smote",
    "adasyn",
    "kernel_smote",
    "nearmiss1",
)
ORIGINAL, DUPLICATED, SYNTHETIC = 0, 1, 2
ORIGIN_NAMES = ("original", "duplicated", "synthetic")


@dataclass(frozen=True)
class BalanceParams:
    technique: str
    k_neighbors: int | None = None  # None: 5, or 3 for nearmiss1
    target_ratio: float = 1.0
    bandwidth: float = 0.05
    n_clusters: int = 8
    hs_weight: float | str = 4.0  # "auto": weight that equalizes the target class mass ratio
    binarize: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown balancing technique {self.technique!r}")
        if not self.target_ratio > 0:
            raise ValueError("target_ratio must be positive")
        if not 0.0 <= self.bandwidth <= 1.0:
            raise ValueError("bandwidth must lie in [0, 1]")
        if self.k_neighbors is not None and self.k_neighbors < 1:
            raise ValueError("k_neighbors must be positive")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be positive")
        if self.hs_weight != "auto" and not float(self.hs_weight) > 0:
            raise ValueError("hs_weight must be positive or 'auto'")

    @property
    def k(self) -> int:
        if self.k_neighbors is not None:
            return self.k_neighbors
        return 3 if self.technique == "nearmiss1" else 5

    def to_dict(self) -> dict:
        return {
            "technique": self.technique,
            "k_neighbors": self.k_neighbors,
            "target_ratio": self.target_ratio,
            "bandwidth": self.bandwidth,
            "n_clusters": self.n_clusters,
            "hs_weight": self.hs_weight,
            "binarize": self.binarize,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BalanceParams":
        return cls(**d)


@dataclass(frozen=True)
class ResampledSet:
    X: np.ndarray
    y: np.ndarray
    origin: np.ndarray  # ORIGINAL / DUPLICATED / SYNTHETIC per row
    source: np.ndarray = field(repr=False)  # (n, 2) input row indices; -1 where unused
    weights: np.ndarray | None = None  # per-row training weights (class_weight only)

    @property
    def origin_names(self) -> list[str]:
        return [ORIGIN_NAMES[o] for o in self.origin]

    def counts(self) -> tuple[int, int]:
        n1 = int(np.sum(self.y == 1))
        return self.y.size - n1, n1


@dataclass(frozen=True)
class ClassWeights:
    weights: np.ndarray

    def __post_init__(self):
        if not (self.weights > 0).all():
            raise ValueError("class weights must be positive")


def class_weights(y, hs_weight: float = 4.0) -> ClassWeights:
    if not hs_weight > 0:
        raise ValueError("hs_weight must be positive")
    y = np.asarray(y)
    return ClassWeights(np.where(y == 1, float(hs_weight), 1.0))


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _prepare(X, y):
    X = np.asarray(getattr(X, "values", X), dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"X has {X.shape[0]} rows, y has {y.shape[0]}")
    n1 = int(y.sum())
    n0 = y.size - n1
    minority = 1 if n1 <= n0 else 0
    return X, y, minority


def _identity(X, y) -> ResampledSet:
    n = y.size
    src = np.column_stack([np.arange(n), np.full(n, -1)])
    return ResampledSet(X.copy(), y.copy(), np.zeros(n, dtype=np.int64), src)


def _oversample_target(y, minority, ratio) -> int:
    """Number of generated minority rows needed to reach ``ratio``."""
    n_min = int(np.sum(y == minority))
    n_maj = y.size - n_min
    return max(0, int(round(ratio * n_maj)) - n_min)


def _append(X, y, minority, new_X, origin, source) -> ResampledSet:
    base = _identity(X, y)
    m = new_X.shape[0]
    return ResampledSet(
        np.vstack([base.X, new_X]) if m else base.X,
        np.concatenate([base.y, np.full(m, minority, dtype=np.int64)]),
        np.concatenate([base.origin, np.full(m, origin, dtype=np.int64)]),
        np.vstack([base.source, source]) if m else base.source,
    )


def _subset(X, y, keep) -> ResampledSet:
    keep = np.sort(np.asarray(keep, dtype=np.int64))
    src = np.column_stack([keep, np.full(keep.size, -1)])
    return ResampledSet(X[keep], y[keep], np.zeros(keep.size, dtype=np.int64), src)


def knn_indices(query, ref, k, exclude_self=False):
    """Indices of the ``k`` nearest ``ref`` rows for each query row.

    Euclidean distance; ties go to the lower ``ref`` index. With
    ``exclude_self`` the query set is ``ref`` itself and each row skips its
    own index (but not exact duplicates).
    """
    D = cdist(query, ref, "sqeuclidean")
    if exclude_self:
        np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")
    return order[:, :k]


def _interpolate(Xm, base_rows, nbr_rows, rng, binarize):
    u = rng.random(base_rows.size)[:, None]
    out = Xm[base_rows] + u * (Xm[nbr_rows] - Xm[base_rows])
    if binarize:
        out = (out >= 0.5).astype(np.float64)
    return out


def _smote_rows(Xm, counts, k, rng, binarize):
    """``counts[i]`` synthetic rows from minority row i toward its neighbors.

    Returns (rows, base indices, neighbor indices) relative to ``Xm``.
    """
    kk = min(k, Xm.shape[0] - 1)
    nbrs = knn_indices(Xm, Xm, kk, exclude_self=True)
    base = np.repeat(np.arange(Xm.shape[0]), counts)
    pick = rng.integers(0, kk, size=base.size)
    other = nbrs[base, pick]
    return _interpolate(Xm, base, other, rng, binarize), base, other


def _largest_remainder(weights, total):
    """Integer allocation of ``total`` proportional to ``weights`` (sum exact)."""
    weights = np.asarray(weights, dtype=np.float64)
    if total <= 0:
        return np.zeros(weights.size, dtype=np.int64)
    if weights.sum() <= 0:
        weights = np.ones(weights.size)
    quota = weights / weights.sum() * total
    counts = np.floor(quota).astype(np.int64)
    short = total - counts.sum()
    frac = quota - counts
    order = np.lexsort((np.arange(frac.size), -frac))
    counts[order[:short]] += 1
    return counts


def _need_minority(y, minority, min_count=2):
    n_min = int(np.sum(y == minority))
    if n_min < min_count:
        raise TooFewMinority(f"need at least {min_count} minority rows, got {n_min}")
    return np.flatnonzero(y == minority)


# --------------------------------------------------------------------------
# techniques
# --------------------------------------------------------------------------


def random_oversample(X, y, params: BalanceParams) -> ResampledSet:
    X, y, minority = _prepare(X, y)
    G = _oversample_target(y, minority, params.target_ratio)
    if G == 0:
        return _identity(X, y)
    idx = _need_minority(y, minority, 1)
    rng = np.random.default_rng(params.seed)
    picks = idx[rng.integers(0, idx.size, size=G)]
    src = np.column_stack([picks, np.full(G, -1)])
    return _append(X, y, minority, X[picks], DUPLICATED, src)


def _undersample_target(y, minority, ratio) -> int:
    n_min = int(np.sum(y == minority))
    n_maj = y.size - n_min
    keep = int(round(n_min / ratio))
    if keep > n_maj:
        raise ValueError(f"target ratio {ratio} needs {keep} majority rows but only {n_maj} exist")
    return keep


def random_undersample(X, y, params: BalanceParams) -> ResampledSet:
    X, y, minority = _prepare(X, y)
    keep_maj = _undersample_target(y, minority, params.target_ratio)
    rng = np.random.default_rng(params.seed)
    maj = np.flatnonzero(y != minority)
    chosen = rng.choice(maj, size=keep_maj, replace=False)
    return _subset(X, y, np.concatenate([chosen, np.flatnonzero(y == minority)]))


def combined_over_under(X, y, params: BalanceParams) -> ResampledSet:
    """Shrink the majority to floor(n / (1 + ratio)) and grow the minority to
    ``ratio`` times that, keeping the total close to the input size."""
    X, y, minority = _prepare(X, y)
    total = y.size
    maj = np.flatnonzero(y != minority)
    mino = _need_minority(y, minority, 1)
    n_maj_t = min(maj.size, int(np.floor(total / (1.0 + params.target_ratio))))
    n_min_t = int(round(params.target_ratio * n_maj_t))
    rng = np.random.default_rng(params.seed)
    keep_maj = rng.choice(maj, size=n_maj_t, replace=False)
    if n_min_t <= mino.size:
        keep_min = rng.choice(mino, size=n_min_t, replace=False)
        return _subset(X, y, np.concatenate([keep_maj, keep_min]))
    kept = _subset(X, y, np.concatenate([keep_maj, mino]))
    extra = mino[rng.integers(0, mino.size, size=n_min_t - mino.size)]
    m = extra.size
    return ResampledSet(
        np.vstack([kept.X, X[extra]]),
        np.concatenate([kept.y, np.full(m, minority, dtype=np.int64)]),
        np.concatenate([kept.origin, np.full(m, DUPLICATED, dtype=np.int64)]),
        np.vstack([kept.source, np.column_stack([extra, np.full(m, -1)])]),
    )


def smote(X, y, params: BalanceParams) -> ResampledSet:
    X, y, minority = _prepare(X, y)
    G = _oversample_target(y, minority, params.target_ratio)
    if G == 0:
        return _identity(X, y)
    idx = _need_minority(y, minority)
    rng = np.random.default_rng(params.seed)
    counts = np.bincount(rng.integers(0, idx.size, size=G), minlength=idx.size)
    rows, base, other = _smote_rows(X[idx], counts, params.k, rng, params.binarize)
    return _append(X, y, minority, rows, SYNTHETIC, np.column_stack([idx[base], idx[other]]))


def kmeans_smote(X, y, params: BalanceParams) -> ResampledSet:
    """SMOTE inside k-means clusters dominated by the minority class.

    Sparser clusters (larger mean pairwise minority distance per minority
    member) receive more synthetic rows. Without an eligible cluster the
    result is exactly ``smote(X, y, params)``.
    """
    X, y, minority = _prepare(X, y)
    G = _oversample_target(y, minority, params.target_ratio)
    if G == 0:
        return _identity(X, y)
    _need_minority(y, minority)
    n_clusters = min(params.n_clusters, y.size)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        # separate stream so the smote fallback sees the plain seed stream
        _, assign = kmeans2(X, n_clusters, iter=100, minit="++", seed=np.random.default_rng([params.seed, 1]))
    clusters, weights = [], []
    for c in range(n_clusters):
        members = np.flatnonzero(assign == c)
        mino = members[y[members] == minority]
        if members.size == 0 or mino.size < 2 or mino.size / members.size < 0.5:
            continue
        d = cdist(X[mino], X[mino])
        mean_dist = d[np.triu_indices(mino.size, k=1)].mean()
        clusters.append(mino)
        weights.append(mean_dist / mino.size)
    if not clusters:
        return smote(X, y, params)
    alloc = _largest_remainder(weights, G)
    rng = np.random.default_rng(params.seed)
    rows, srcs = [], []
    for mino, n_c in zip(clusters, alloc):
        if n_c == 0:
            continue
        counts = np.bincount(rng.integers(0, mino.size, size=n_c), minlength=mino.size)
        r, base, other = _smote_rows(X[mino], counts, params.k, rng, params.binarize)
        rows.append(r)
        srcs.append(np.column_stack([mino[base], mino[other]]))
    return _append(X, y, minority, np.vstack(rows), SYNTHETIC, np.vstack(srcs))


def adasyn_hardness(X, y, minority, k) -> np.ndarray:
    """Fraction of majority rows among each minority row's k nearest rows."""
    idx = np.flatnonzero(y == minority)
    kk = min(k, y.size - 1)
    D = cdist(X[idx], X, "sqeuclidean")
    D[np.arange(idx.size), idx] = np.inf
    nbrs = np.argsort(D, axis=1, kind="stable")[:, :kk]
    return (y[nbrs] != minority).sum(axis=1) / kk


def adasyn(X, y, params: BalanceParams) -> ResampledSet:
    """Density-adaptive SMOTE. Per-row counts use largest-remainder rounding
    of ``r_i / sum(r) * G`` so that exactly G rows are generated."""
    X, y, minority = _prepare(X, y)
    G = _oversample_target(y, minority, params.target_ratio)
    if G == 0:
        return _identity(X, y)
    idx = _need_minority(y, minority)
    r = adasyn_hardness(X, y, minority, params.k)
    counts = _largest_remainder(r, G)
    rng = np.random.default_rng(params.seed)
    rows, base, other = _smote_rows(X[idx], counts, params.k, rng, params.binarize)
    return _append(X, y, minority, rows, SYNTHETIC, np.column_stack([idx[base], idx[other]]))


def kernel_smote(X, y, params: BalanceParams) -> ResampledSet:
    """Smoothed bootstrap for 0/1 rows: copy a random minority row and flip
    each coordinate (x -> 1 - x) with probability ``bandwidth``."""
    X, y, minority = _prepare(X, y)
    G = _oversample_target(y, minority, params.target_ratio)
    if G == 0:
        return _identity(X, y)
    idx = _need_minority(y, minority, 1)
    rng = np.random.default_rng(params.seed)
    picks = idx[rng.integers(0, idx.size, size=G)]
    flips = rng.random((G, X.shape[1])) < params.bandwidth
    rows = np.where(flips, 1.0 - X[picks], X[picks])
    return _append(X, y, minority, rows, SYNTHETIC, np.column_stack([picks, np.full(G, -1)]))


def nearmiss_scores(X, y, minority, k=3) -> tuple[np.ndarray, np.ndarray]:
    """Majority row indices and their mean distance to the k closest minority rows."""
    maj = np.flatnonzero(y != minority)
    mino = np.flatnonzero(y == minority)
    kk = min(k, mino.size)
    D = np.sqrt(cdist(X[maj], X[mino], "sqeuclidean"))
    D.sort(axis=1)
    return maj, D[:, :kk].sum(axis=1) / kk


def nearmiss1(X, y, params: BalanceParams) -> ResampledSet:
    X, y, minority = _prepare(X, y)
    _need_minority(y, minority, 1)
    keep_maj = _undersample_target(y, minority, params.target_ratio)
    maj, score = nearmiss_scores(X, y, minority, params.k)
    chosen = maj[np.lexsort((maj, score))[:keep_maj]]
    return _subset(X, y, np.concatenate([chosen, np.flatnonzero(y == minority)]))


def weighted(X, y, params: BalanceParams) -> ResampledSet:
    """Identity resampling carrying minority loss weights.

    ``hs_weight="auto"`` picks the HS weight that makes the weighted
    minority-to-majority mass ratio equal ``target_ratio`` (an HS weight
    below 1 when HS is the larger class).
    """
    X, y, minority = _prepare(X, y)
    base = _identity(X, y)
    hs = params.hs_weight
    if hs == "auto":
        n1 = int(y.sum())
        n0 = y.size - n1
        if n1 == 0 or n0 == 0:
            hs = 1.0
        elif minority == 1:
            hs = params.target_ratio * n0 / n1
        else:
            hs = n0 / (params.target_ratio * n1)
    return replace(base, weights=class_weights(y, float(hs)).weights)


_DISPATCH = {
    "class_weight": weighted,
    "random_over": random_oversample,
    "random_under": random_undersample,
    "combined": combined_over_under,
    "smote": smote,
    "kmeans_smote": kmeans_smote,
    "adasyn": adasyn,
    "kernel_smote": kernel_smote,
    "nearmiss1": nearmiss1,
}


def apply_balance(X, y, params: BalanceParams | None) -> ResampledSet:
    """Run the configured technique; ``None`` means no balancing."""
    if params is None:
        X, y, _ = _prepare(X, y)
        return _identity(X, y)
    return _DISPATCH[params.technique](X, y, params)


__all__ = [
    "TECHNIQUES",
    "ORIGIN_NAMES",
    "BalanceParams",
    "ResampledSet",
    "ClassWeights",
    "class_weights",
    "random_oversample",
    "random_undersample",
    "combined_over_under",
    "smote",
    "kmeans_smote",
    "adasyn",
    "kernel_smote",
    "nearmiss1",
    "knn_indices",
    "nearmiss_scores",
    "apply_balance",
]
