"""Decision trees, random forests, extremely randomized trees and gradient
boosting on a shared histogram tree engine."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K

MAX_BINS = 64


@dataclass
class Binner:
    """Per-column split thresholds. Columns with few distinct values keep one
    bin per value; others use quantile thresholds."""

    thresholds: np.ndarray  # (d, MAX_BINS - 1), padded with +inf
    n_bins: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray, max_bins: int = MAX_BINS) -> "Binner":
        n, d = X.shape
        thr = np.full((d, max_bins - 1), np.inf)
        n_bins = np.ones(d, dtype=np.int64)
        qs = np.linspace(0, 1, max_bins + 1)[1:-1]
        for f in range(d):
            u = np.unique(X[:, f])
            if u.size <= 1:
                continue
            if u.size <= max_bins:
                t = (u[:-1] + u[1:]) / 2.0
            else:
                t = np.unique(np.quantile(X[:, f], qs))
                t = t[t < u[-1]]
            thr[f, : t.size] = t
            n_bins[f] = t.size + 1
        return cls(thr, n_bins)

    def transform(self, X: np.ndarray, order: str = "F") -> np.ndarray:
        # column-major suits per-feature scans, row-major suits full histograms
        Xb = K.apply_bins(np.ascontiguousarray(X, dtype=np.float64), self.thresholds, self.n_bins)
        return np.asfortranarray(Xb) if order == "F" else Xb

    def threshold(self, feature: np.ndarray, split_bin: np.ndarray) -> np.ndarray:
        out = np.full(feature.shape, np.nan)
        internal = feature >= 0
        out[internal] = self.thresholds[feature[internal], split_bin[internal]]
        return out


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return K.predict_tree(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold, self.left, self.right, self.value)

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, dpt = stack.pop()
            best = max(best, dpt)
            if self.feature[node] >= 0:
                stack.append((int(self.left[node]), dpt + 1))
                stack.append((int(self.right[node]), dpt + 1))
        return best

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if math.isnan(t) else float(t) for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.array([np.nan if t is None else t for t in d["threshold"]], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
        )


@dataclass
class GrownTree:
    tree: Tree
    node_weight: np.ndarray
    node_impurity: np.ndarray
    importance: np.ndarray


def grow_class_tree(Xb, binner: Binner, y, w, *, criterion="gini", max_depth=None, min_samples_leaf=1,
                    max_features=None, random_split=False, seed=0, rows=None) -> GrownTree:
    d = Xb.shape[1]
    crit = K.GINI if criterion == "gini" else K.ENTROPY
    if rows is None:
        rows = np.arange(Xb.shape[0], dtype=np.int64)
    mf = d if max_features is None else int(max(1, min(d, max_features)))
    feature, split_bin, left, right, value, nw, ni, imp = K.build_class_tree(
        Xb, np.asarray(y, dtype=np.float64), np.asarray(w, dtype=np.float64), np.array(rows, dtype=np.int64),
        binner.n_bins, -1 if max_depth is None else int(max_depth), int(min_samples_leaf), mf, crit,
        bool(random_split), int(seed),
    )
    tree = Tree(feature, binner.threshold(feature, split_bin), left, right, value)
    return GrownTree(tree, nw, ni, imp)


def grow_gradient_tree(Xb, binner: Binner, g, h, *, max_depth=6, max_leaves=None, leaf_wise=False, lam=1.0,
                       min_child_weight=1e-3, min_samples_leaf=1, random_split=False, seed=0) -> Tree:
    if max_leaves is None:
        max_leaves = 2 ** max_depth if max_depth is not None and max_depth >= 0 else 31
    rows = np.arange(Xb.shape[0], dtype=np.int64)
    feature, split_bin, left, right, value = K.build_gradient_tree(
        Xb, np.asarray(g, dtype=np.float64), np.asarray(h, dtype=np.float64), rows, binner.n_bins,
        -1 if max_depth is None else int(max_depth), int(max_leaves), bool(leaf_wise), float(lam),
        float(min_child_weight), int(min_samples_leaf), bool(random_split), int(seed),
    )
    return Tree(feature, binner.threshold(feature, split_bin), left, right, value)


def resolve_max_features(spec, d: int) -> int:
    if spec is None or spec == "all":
        return d
    if spec == "sqrt":
        return max(1, int(math.sqrt(d)))
    if spec == "log2":
        return max(1, int(math.log2(d))) if d > 1 else 1
    if isinstance(spec, float):
        return max(1, int(spec * d))
    return max(1, min(d, int(spec)))


def fit_forest(X, y, w, *, n_trees=200, criterion="gini", max_depth=12, min_samples_leaf=1, max_features="sqrt",
               bootstrap=True, random_split=False, seed=0):
    """Bag ``n_trees`` trees. Returns (trees, mean normalized importance)."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    binner = Binner.fit(X)
    Xb = binner.transform(X)
    rng = np.random.default_rng(seed)
    mf = resolve_max_features(max_features, d)
    trees = []
    importance = np.zeros(d)
    for _ in range(n_trees):
        tree_seed = int(rng.integers(2**31 - 1))
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
            rows = np.flatnonzero(counts)
            wt = w * counts
        else:
            rows = None
            wt = w
        grown = grow_class_tree(Xb, binner, y, wt, criterion=criterion, max_depth=max_depth,
                                min_samples_leaf=min_samples_leaf, max_features=mf, random_split=random_split,
                                seed=tree_seed, rows=rows)
        trees.append(grown.tree)
        root = grown.node_weight[0]
        if root > 0:
            importance += grown.importance / root
    if n_trees:
        importance /= n_trees
    return trees, importance


def log_loss(y, margin, w) -> float:
    # weighted mean of softplus(z) - y z
    z = margin
    ll = np.logaddexp(0.0, z) - y * z
    return float(np.sum(w * ll) / np.sum(w))


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def fit_gbdt(X, y, w, *, n_rounds=100, learning_rate=0.1, max_depth=6, max_leaves=None, leaf_wise=False, lam=1.0,
             min_child_weight=1e-3, min_samples_leaf=5, random_split=False, seed=0):
    """Second-order boosting of the weighted binary log-loss.

    A round whose tree would raise the training loss has its step halved
    (up to 20 times, then dropped), so the loss never increases.
    Returns (base_margin, trees, losses) where ``losses[0]`` is the loss of the
    constant start and ``losses[k]`` the loss after round k.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    binner = Binner.fit(X)
    Xb = binner.transform(X, order="C")
    rng = np.random.default_rng(seed)
    pbar = float(np.clip(np.sum(w * y) / np.sum(w), 1e-6, 1 - 1e-6))
    base = math.log(pbar / (1 - pbar))
    margin = np.full(X.shape[0], base)
    losses = [log_loss(y, margin, w)]
    trees = []
    for _ in range(n_rounds):
        p = sigmoid(margin)
        g = w * (p - y)
        h = w * p * (1 - p)
        tree = grow_gradient_tree(Xb, binner, g, h, max_depth=max_depth, max_leaves=max_leaves, leaf_wise=leaf_wise,
                                  lam=lam, min_child_weight=min_child_weight, min_samples_leaf=min_samples_leaf,
                                  random_split=random_split, seed=int(rng.integers(2**31 - 1)))
        step = tree.predict(X)
        scale = learning_rate
        for _ in range(20):
            cand = margin + scale * step
            loss = log_loss(y, cand, w)
            if loss <= losses[-1]:
                break
            scale *= 0.5
        else:
            scale = 0.0
            cand, loss = margin, losses[-1]
        tree.value = tree.value * scale
        margin = cand
        losses.append(loss)
        trees.append(tree)
    return base, trees, losses
