"""Feature ranking (correlation, chi-squared, mutual information, forest
importance, recursive elimination), top-k selection and union merge."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import FractionalInput, LengthMismatch
from .models import linear
from .models.trees import fit_forest

METHODS = ("pearson", "chi2", "mutual_info", "forest_importance", "rfe_logistic")


def _arrays(X, y):
    values = getattr(X, "values", X)
    values = np.asarray(values, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != y.shape[0]:
        raise LengthMismatch(f"X has {values.shape[0]} rows, y has {y.shape[0]}")
    return values, y


def _require_binary(X):
    if not np.isin(X, (0.0, 1.0)).all():
        raise FractionalInput("chi-squared and mutual information need 0/1 columns")


def contingency(X, y):
    """Per-column 2x2 counts ``[n(x=0,y=0), n(0,1), n(1,0), n(1,1)]``."""
    X, y = _arrays(X, y)
    _require_binary(X)
    n11 = X.T @ y
    n10 = X.sum(axis=0) - n11
    n1 = y.sum()
    n01 = n1 - n11
    n00 = (y.size - n1) - n10
    return np.stack([n00, n01, n10, n11], axis=1)


def pearson_scores(X, y) -> np.ndarray:
    """|Pearson r| of each column with y; constant columns score 0."""
    X, y = _arrays(X, y)
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    cov = Xc.T @ yc
    denom = np.sqrt((Xc * Xc).sum(axis=0) * (yc @ yc))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    return np.abs(r)


def chi2_scores(X, y) -> np.ndarray:
    """Pearson chi-squared statistic of each column's 2x2 table against y."""
    obs = contingency(X, y)
    N = obs.sum(axis=1, keepdims=True)
    row = np.stack([obs[:, 0] + obs[:, 1], obs[:, 0] + obs[:, 1], obs[:, 2] + obs[:, 3], obs[:, 2] + obs[:, 3]], axis=1)
    col = np.stack([obs[:, 0] + obs[:, 2], obs[:, 1] + obs[:, 3], obs[:, 0] + obs[:, 2], obs[:, 1] + obs[:, 3]], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        expected = row * col / np.where(N > 0, N, 1.0)
        terms = np.where(expected > 0, (obs - expected) ** 2 / np.where(expected > 0, expected, 1.0), 0.0)
    return terms.sum(axis=1)


def mutual_information_scores(X, y) -> np.ndarray:
    """Empirical I(X_j; y) in nats from each column's 2x2 table."""
    obs = contingency(X, y)
    N = obs.sum(axis=1, keepdims=True)
    p = obs / np.where(N > 0, N, 1.0)
    px = np.stack([p[:, 0] + p[:, 1]] * 2 + [p[:, 2] + p[:, 3]] * 2, axis=1)
    py = np.stack([p[:, 0] + p[:, 2], p[:, 1] + p[:, 3]] * 2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(p > 0, p * np.log(p / np.where(p > 0, px * py, 1.0)), 0.0)
    return np.maximum(terms.sum(axis=1), 0.0)


FOREST_DEFAULTS = {"n_trees": 200, "max_features": "sqrt", "max_depth": 12, "min_samples_leaf": 1}


def forest_importance_scores(X, y, forest_params: dict | None = None, seed: int = 0) -> np.ndarray:
    """Mean Gini impurity decrease per column over a random forest, summing to 1."""
    X, y = _arrays(X, y)
    params = {**FOREST_DEFAULTS, **(forest_params or {})}
    _, importance = fit_forest(X, y, np.ones(y.size), criterion="gini", seed=seed, **params)
    total = importance.sum()
    return importance / total if total > 0 else importance


def rfe_logistic_ranking(X, y, step: int = 1, seed: int = 0, l2: float = 1e-4, columns=None) -> "FeatureRanking":
    """Recursive elimination with an L2 logistic fit on standardized columns.

    Each round drops the ``step`` surviving columns with the smallest
    |coefficient| (equal magnitudes: higher index goes first). Scores are the
    elimination round, survivors of the last fit scoring highest. The fit is
    deterministic, so ``seed`` is accepted only for a uniform interface.
    """
    if step < 1:
        raise ValueError("step must be a positive integer")
    if columns is None:
        columns = _columns_of(X, np.shape(getattr(X, "values", X))[1])
    X, y = _arrays(X, y)
    d = X.shape[1]
    sd = X.std(axis=0)
    Z = (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    w = np.ones(y.size)
    alive = np.arange(d)
    scores = np.zeros(d)
    theta = None
    rnd = 0
    while alive.size:
        rnd += 1
        if alive.size == 1:
            scores[alive] = rnd
            break
        theta, _ = linear.fit_logistic_lbfgs(Z[:, alive], y, w, l2=l2, theta0=theta)
        mag = np.abs(theta[1:])
        # lexsort: last key is primary -> ascending |coef|, then descending index
        drop_pos = np.lexsort((-alive, mag))[: min(step, alive.size)]
        scores[alive[drop_pos]] = rnd
        keep = np.ones(alive.size, dtype=bool)
        keep[drop_pos] = False
        alive = alive[keep]
        theta = np.concatenate([[theta[0]], theta[1:][keep]])
    return ranking_from_scores("rfe_logistic", scores, columns)


def _columns_of(X, d):
    cols = getattr(X, "columns", None)
    return tuple(cols) if cols is not None else tuple(range(d))


@dataclass(frozen=True)
class FeatureRanking:
    method: str
    scores: np.ndarray
    order: np.ndarray
    columns: tuple

    def top_k(self, k: int = 50) -> frozenset:
        return top_k(self, k)


def ranking_from_scores(method: str, scores, columns) -> FeatureRanking:
    """Order by descending score; equal scores keep ascending column index."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(scores.size), -scores))
    return FeatureRanking(method, scores, order, tuple(columns))


def rank(method: str, matrix, y, seed: int = 0, rfe_step: int = 1, forest_params: dict | None = None) -> FeatureRanking:
    """Run one named ranking method on a BinaryMatrix (or a plain array)."""
    X, y = _arrays(matrix, y)
    columns = _columns_of(matrix, X.shape[1])
    if method == "pearson":
        return ranking_from_scores(method, pearson_scores(X, y), columns)
    if method == "chi2":
        return ranking_from_scores(method, chi2_scores(X, y), columns)
    if method == "mutual_info":
        return ranking_from_scores(method, mutual_information_scores(X, y), columns)
    if method == "forest_importance":
        return ranking_from_scores(method, forest_importance_scores(X, y, forest_params, seed), columns)
    if method == "rfe_logistic":
        return rfe_logistic_ranking(X, y, step=rfe_step, seed=seed, columns=columns)
    raise ValueError(f"unknown ranking method {method!r}")


def top_k(ranking: FeatureRanking, k: int = 50) -> frozenset:
    if k < 1:
        raise ValueError("k must be at least 1")
    return frozenset(ranking.columns[j] for j in ranking.order[:k])


@dataclass(frozen=True)
class SelectionResult:
    selected: frozenset
    provenance: dict  # column -> tuple of contributing method names

    def __len__(self):
        return len(self.selected)


def merge_union(selections: Mapping[str, Iterable] | Iterable[Iterable]) -> SelectionResult:
    """Union of selected column sets, remembering which inputs chose each column.

    Accepts ``{method: columns}`` or a plain list (inputs are then named by
    position).
    """
    if isinstance(selections, Mapping):
        items = list(selections.items())
    else:
        items = [(str(i), s) for i, s in enumerate(selections)]
    if not items:
        raise ValueError("merge_union needs at least one selection")
    provenance: dict = {}
    for name, cols in items:
        for c in cols:
            provenance.setdefault(c, [])
            if name not in provenance[c]:
                provenance[c].append(name)
    provenance = {c: tuple(sorted(v)) for c, v in provenance.items()}
    return SelectionResult(frozenset(provenance), provenance)


__all__ = [
    "METHODS",
    "FeatureRanking",
    "SelectionResult",
    "contingency",
    "pearson_scores",
    "chi2_scores",
    "mutual_information_scores",
    "forest_importance_scores",
    "rfe_logistic_ranking",
    "ranking_from_scores",
    "rank",
    "top_k",
    "merge_union",
]
