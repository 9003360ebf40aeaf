"""Classifier suite under one training contract.

Every model exposes ``predict_proba(X) -> P(HS)``. Sample weights enter each
learner as loss weights: logistic gradients, MCMC log-likelihood terms,
impurity counts, boosting gradients and the network loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ColumnMismatch, Malformed, NonFinite, WrongKind
from . import linear, mlp, trees

KINDS = ("logistic", "bayes_logit", "tree", "random_forest", "extra_trees", "gbdt", "mlp")
TREE_KINDS = ("tree", "random_forest", "extra_trees")
PROBA_CLAMP = 1e-6
FORMAT_VERSION = 1

DEFAULTS: dict[str, dict[str, Any]] = {
    "logistic": {"solver": "gd", "learning_rate": 0.1, "epochs": 500, "l2": 1e-4},
    "bayes_logit": {"prior_scale": 2.5, "burn_in": 2000, "n_keep": 8000, "thin": 4, "target_accept": 0.30},
    "tree": {"max_depth": None, "min_samples_leaf": 1},
    "random_forest": {"n_trees": 200, "max_features": "sqrt", "max_depth": None, "min_samples_leaf": 1},
    "extra_trees": {"n_trees": 200, "max_features": "sqrt", "max_depth": None, "min_samples_leaf": 1},
    "gbdt": {"learning_rate": 0.1, "n_rounds": 100, "max_depth": 6, "max_leaves": 31, "lam": 1.0,
             "min_child_weight": 1e-3, "min_samples_leaf": 5},
    "mlp": {"hidden": [64, 32], "epochs": 100, "learning_rate": 1e-3, "batch_size": 128},
}
PRESET_DEFAULTS = {
    ("gbdt", "large"): {"n_rounds": 300},
    ("mlp", "large"): {"hidden": [128, 64, 32]},
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    criterion: str | None = None
    growth: str | None = None
    preset: str | None = None
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.criterion is not None and self.kind not in TREE_KINDS:
            raise ValueError("criterion applies to tree kinds only")
        if self.kind in TREE_KINDS and self.criterion is None:
            object.__setattr__(self, "criterion", "gini")
        if self.criterion not in (None, "gini", "entropy"):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.growth is not None and self.kind != "gbdt":
            raise ValueError("growth applies to gbdt only")
        if self.kind == "gbdt" and self.growth is None:
            object.__setattr__(self, "growth", "level_wise")
        if self.growth not in (None, "level_wise", "leaf_wise"):
            raise ValueError(f"unknown growth {self.growth!r}")
        if self.preset is not None and self.kind not in ("gbdt", "mlp"):
            raise ValueError("preset applies to gbdt and mlp only")
        if self.kind in ("gbdt", "mlp") and self.preset is None:
            object.__setattr__(self, "preset", "default")
        if self.preset not in (None, "default", "large", "xt"):
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.preset == "xt" and self.kind != "gbdt":
            raise ValueError("the xt preset is a gbdt variant")

    def params(self, overrides: dict | None = None) -> dict:
        out = dict(DEFAULTS[self.kind])
        out.update(PRESET_DEFAULTS.get((self.kind, self.preset), {}))
        out.update(self.hyperparams)
        out.update(overrides or {})
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "criterion": self.criterion, "growth": self.growth, "preset": self.preset,
                "hyperparams": dict(self.hyperparams)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["kind"], d.get("criterion"), d.get("growth"), d.get("preset"), dict(d.get("hyperparams") or {}))


# Report slots, in results-table order, and the generic learner behind each.
SLOTS: dict[str, ModelSpec] = {
    "BML": ModelSpec("bayes_logit"),
    "CatBoost": ModelSpec("gbdt", growth="level_wise", preset="default"),
    "ExtraTreesEntr": ModelSpec("extra_trees", criterion="entropy"),
    "ExtraTreesGini": ModelSpec("extra_trees", criterion="gini"),
    "LightGBM": ModelSpec("gbdt", growth="leaf_wise", preset="default"),
    "LightGBMLarge": ModelSpec("gbdt", growth="leaf_wise", preset="large"),
    "LightGBMXT": ModelSpec("gbdt", growth="leaf_wise", preset="xt"),
    "NeuralNetFastAI": ModelSpec("mlp", preset="large"),
    "NeuralNetTorch": ModelSpec("mlp", preset="default"),
    "RandomForestEntr": ModelSpec("random_forest", criterion="entropy"),
    "RandomForestGini": ModelSpec("random_forest", criterion="gini"),
    "XGBoost": ModelSpec("gbdt", growth="level_wise", preset="large"),
}


@dataclass
class TrainConfig:
    seed: int = 0
    sample_weights: np.ndarray | None = None
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    sd: np.ndarray
    q025: np.ndarray
    q975: np.ndarray
    acceptance_rate: float
    names: tuple[str, ...] = ()


class TrainedModel:
    """Fitted model. Subclasses implement ``_proba`` and (de)serialization."""

    kind = "constant"

    def __init__(self, spec: ModelSpec | None, n_features: int, meta: dict | None = None,
                 columns: tuple[str, ...] | None = None):
        self.spec = spec
        self.n_features = n_features
        self.meta = dict(meta or {})
        self.columns = tuple(columns) if columns is not None else None

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ColumnMismatch(f"model expects {self.n_features} columns, got {X.shape[-1] if X.ndim else 0}")
        return np.clip(self._proba(X), 0.0, 1.0)

    def _proba(self, X):
        raise NotImplementedError

    def _params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "format": "sevlab-model",
            "version": FORMAT_VERSION,
            "model": type(self).kind,
            "spec": self.spec.to_dict() if self.spec else None,
            "n_features": self.n_features,
            "columns": list(self.columns) if self.columns is not None else None,
            "meta": self.meta,
            "params": self._params(),
        }


class ConstantModel(TrainedModel):
    kind = "constant"

    def __init__(self, spec, n_features, p, meta=None, columns=None):
        super().__init__(spec, n_features, meta, columns)
        self.p = float(p)

    def _proba(self, X):
        return np.full(X.shape[0], self.p)

    def _params(self):
        return {"p": self.p}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        return cls(spec, n, p["p"], meta, columns)


class LogisticModel(TrainedModel):
    kind = "logistic"

    def __init__(self, spec, n_features, theta, meta=None, columns=None):
        super().__init__(spec, n_features, meta, columns)
        self.theta = np.asarray(theta, dtype=np.float64)

    @property
    def intercept(self):
        return float(self.theta[0])

    @property
    def coef(self):
        return self.theta[1:]

    def _proba(self, X):
        return trees.sigmoid(self.theta[0] + X @ self.theta[1:])

    def _params(self):
        return {"theta": self.theta.tolist()}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        return cls(spec, n, p["theta"], meta, columns)


class BayesLogitModel(TrainedModel):
    kind = "bayes_logit"

    def __init__(self, spec, n_features, draws, mean, scale, acceptance_rate, meta=None, columns=None):
        super().__init__(spec, n_features, meta, columns)
        self.draws = np.asarray(draws, dtype=np.float64)  # standardized scale
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)
        self.acceptance_rate = float(acceptance_rate)

    def original_scale_draws(self):
        return linear.unstandardize(self.draws, self.mean, self.scale)

    def _proba(self, X):
        Z = (X - self.mean) / self.scale
        margins = self.draws[:, :1].T + Z @ self.draws[:, 1:].T
        return trees.sigmoid(margins).mean(axis=1)

    def _params(self):
        return {"draws": self.draws.tolist(), "mean": self.mean.tolist(), "scale": self.scale.tolist(),
                "acceptance_rate": self.acceptance_rate}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        draws = np.asarray(p["draws"], dtype=np.float64).reshape(-1, n + 1)
        return cls(spec, n, draws, p["mean"], p["scale"], p["acceptance_rate"], meta, columns)


class TreeEnsembleModel(TrainedModel):
    """A single tree or a bag of trees; P(HS) is the mean leaf frequency."""

    kind = "trees"

    def __init__(self, spec, n_features, tree_list, meta=None, columns=None, importance=None):
        super().__init__(spec, n_features, meta, columns)
        self.trees = list(tree_list)
        self.importance = None if importance is None else np.asarray(importance, dtype=np.float64)

    def _proba(self, X):
        X = np.ascontiguousarray(X)
        out = np.zeros(X.shape[0])
        for t in self.trees:
            out += t.predict(X)
        return out / len(self.trees)

    def _params(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        return cls(spec, n, [trees.Tree.from_dict(t) for t in p["trees"]], meta, columns)


class GBDTModel(TrainedModel):
    kind = "gbdt"

    def __init__(self, spec, n_features, base, tree_list, meta=None, columns=None):
        super().__init__(spec, n_features, meta, columns)
        self.base = float(base)
        self.trees = list(tree_list)

    def margin(self, X):
        X = np.ascontiguousarray(X)
        out = np.full(X.shape[0], self.base)
        for t in self.trees:
            out += t.predict(X)
        return out

    def _proba(self, X):
        return trees.sigmoid(self.margin(X))

    def _params(self):
        return {"base": self.base, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        return cls(spec, n, p["base"], [trees.Tree.from_dict(t) for t in p["trees"]], meta, columns)


class MLPModel(TrainedModel):
    kind = "mlp"

    def __init__(self, spec, n_features, params, meta=None, columns=None):
        super().__init__(spec, n_features, meta, columns)
        self.params = [[np.asarray(W, dtype=np.float64), np.asarray(b, dtype=np.float64)] for W, b in params]

    def _proba(self, X):
        return trees.sigmoid(mlp.predict_logit(self.params, X))

    def _params(self):
        return {"layers": [[W.tolist(), b.tolist()] for W, b in self.params]}

    @classmethod
    def _from_params(cls, spec, n, meta, columns, p):
        layers = []
        fan_in = n
        for W, b in p["layers"]:
            W = np.asarray(W, dtype=np.float64).reshape(fan_in, -1)
            layers.append([W, b])
            fan_in = W.shape[1]
        return cls(spec, n, layers, meta, columns)


_MODEL_CLASSES = {c.kind: c for c in (ConstantModel, LogisticModel, BayesLogitModel, TreeEnsembleModel, GBDTModel, MLPModel)}


def train(spec: ModelSpec, X, y, cfg: TrainConfig | None = None, columns=None) -> TrainedModel:
    """Fit ``spec`` on (X, y). Single-class data yields a constant model."""
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ColumnMismatch("X must be 2-D with one row per label")
    if not np.isfinite(X).all():
        raise NonFinite("X contains NaN or infinite values")
    n, d = X.shape
    w = np.ones(n) if cfg.sample_weights is None else np.asarray(cfg.sample_weights, dtype=np.float64)
    if w.shape != (n,):
        raise ColumnMismatch("sample_weights must have one entry per row")
    if not (np.isfinite(w).all() and (w > 0).all()):
        raise ValueError("sample weights must be positive and finite")
    meta = {"seed": int(cfg.seed)}

    classes = np.unique(y)
    if n == 0 or classes.size < 2:
        rate = float(y.mean()) if n else 0.0
        meta["degenerate"] = "single_class"
        return ConstantModel(spec, d, np.clip(rate, PROBA_CLAMP, 1 - PROBA_CLAMP), meta, columns)

    hp = spec.params(cfg.overrides)
    kind = spec.kind
    if kind == "logistic":
        if hp["solver"] == "lbfgs":
            theta, loss = linear.fit_logistic_lbfgs(X, y, w, l2=hp["l2"])
        else:
            theta, loss = linear.fit_logistic_gd(X, y, w, learning_rate=hp["learning_rate"], epochs=hp["epochs"],
                                                 l2=hp["l2"])
            meta["rounds"] = hp["epochs"]
        meta["final_loss"] = loss
        return LogisticModel(spec, d, theta, meta, columns)

    if kind == "bayes_logit":
        out = linear.sample_bayes_logit(X, y, w, prior_scale=hp["prior_scale"], burn_in=hp["burn_in"],
                                        n_keep=hp["n_keep"], thin=hp["thin"], target_accept=hp["target_accept"],
                                        seed=cfg.seed)
        meta.update(rounds=hp["burn_in"] + hp["n_keep"], acceptance_rate=out["acceptance_rate"], step=out["step"])
        model = BayesLogitModel(spec, d, out["draws"], out["mean"], out["scale"], out["acceptance_rate"], meta, columns)
        meta["final_loss"] = _weighted_log_loss(y, model.predict_proba(X), w)
        return model

    if kind in TREE_KINDS:
        if kind == "tree":
            opts = dict(n_trees=1, max_features=None, bootstrap=False, random_split=False)
        else:
            opts = dict(n_trees=hp["n_trees"], max_features=hp["max_features"], bootstrap=kind == "random_forest",
                        random_split=kind == "extra_trees")
            opts.update({k: hp[k] for k in ("bootstrap", "random_split") if k in hp})
        tree_list, importance = trees.fit_forest(X, y, w, criterion=spec.criterion, max_depth=hp["max_depth"],
                                                 min_samples_leaf=hp["min_samples_leaf"], seed=cfg.seed, **opts)
        meta["rounds"] = len(tree_list)
        model = TreeEnsembleModel(spec, d, tree_list, meta, columns, importance)
        meta["final_loss"] = _weighted_log_loss(y, model.predict_proba(X), w)
        return model

    if kind == "gbdt":
        leaf_wise = spec.growth == "leaf_wise"
        base, tree_list, losses = trees.fit_gbdt(
            X, y, w, n_rounds=hp["n_rounds"], learning_rate=hp["learning_rate"],
            max_depth=None if leaf_wise else hp["max_depth"], max_leaves=hp["max_leaves"] if leaf_wise else None,
            leaf_wise=leaf_wise, lam=hp["lam"], min_child_weight=hp["min_child_weight"],
            min_samples_leaf=hp["min_samples_leaf"], random_split=spec.preset == "xt", seed=cfg.seed,
        )
        meta.update(rounds=len(tree_list), final_loss=losses[-1], losses=losses)
        return GBDTModel(spec, d, base, tree_list, meta, columns)

    if kind == "mlp":
        params, losses = mlp.fit_mlp(X, y, w, hidden=tuple(hp["hidden"]), epochs=hp["epochs"],
                                     learning_rate=hp["learning_rate"], batch_size=hp["batch_size"], seed=cfg.seed)
        meta.update(rounds=hp["epochs"], final_loss=losses[-1] if losses else None)
        return MLPModel(spec, d, params, meta, columns)

    raise ValueError(f"unhandled kind {kind!r}")


def _weighted_log_loss(y, p, w):
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return float(-np.sum(w * (y * np.log(p) + (1 - y) * np.log(1 - p))) / np.sum(w))


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    return model.predict_proba(X)


def predict_label(probs, threshold: float = 0.5) -> np.ndarray:
    """Label 1 (HS) iff the probability reaches the threshold."""
    return (np.asarray(probs) >= threshold).astype(np.int64)


def posterior_summary(model: TrainedModel) -> PosteriorSummary:
    """Per-coefficient summaries on the original column scale.

    Entry 0 is the intercept.
    """
    if not isinstance(model, BayesLogitModel):
        raise WrongKind("posterior summaries exist only for bayes_logit models")
    draws = model.original_scale_draws()
    names = ("(intercept)",) + (tuple(model.columns) if model.columns else tuple(f"x{j}" for j in range(model.n_features)))
    return PosteriorSummary(
        mean=draws.mean(axis=0),
        sd=draws.std(axis=0, ddof=1) if draws.shape[0] > 1 else np.zeros(draws.shape[1]),
        q025=np.quantile(draws, 0.025, axis=0),
        q975=np.quantile(draws, 0.975, axis=0),
        acceptance_rate=model.acceptance_rate,
        names=names,
    )


def model_from_dict(doc: dict) -> TrainedModel:
    if doc.get("format") != "sevlab-model":
        raise Malformed("not a sevlab model artifact")
    if doc.get("version") != FORMAT_VERSION:
        raise Malformed(f"unsupported model artifact version {doc.get('version')}")
    cls = _MODEL_CLASSES.get(doc["model"])
    if cls is None:
        raise Malformed(f"unknown model type {doc['model']!r}")
    spec = ModelSpec.from_dict(doc["spec"]) if doc.get("spec") else None
    return cls._from_params(spec, int(doc["n_features"]), doc.get("meta") or {}, doc.get("columns"), doc["params"])


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), sort_keys=True) + "\n")


def load_model(path) -> TrainedModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise Malformed(f"{path}: {exc}") from exc
    return model_from_dict(doc)


__all__ = [
    "KINDS",
    "SLOTS",
    "ModelSpec",
    "TrainConfig",
    "TrainedModel",
    "PosteriorSummary",
    "train",
    "predict_proba",
    "predict_label",
    "posterior_summary",
    "save_model",
    "load_model",
    "model_from_dict",
]
