"""Training-dataset plan, model x dataset matrix runner, class-overlap
experiment and results tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import featsel
from .balance import BalanceParams, apply_balance
from .errors import Malformed, SevlabError
from .metrics import REPORT_FIELDS, MetricsReport, evaluate
from .models import SLOTS, ModelSpec, TrainConfig, train
from .synthgen import SyntheticConfig, load_marginal_spec, sample_dataset
from .tabular import (
    BinaryMatrix,
    RawTable,
    SplitConfig,
    add_interaction_columns,
    apply_missing_policy,
    fold_indices,
    one_hot_encode,
    read_raw_csv,
    select_interactions,
    split_indices,
)

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "Training Dataset Number",
    "Feature Selection Technique",
    "Data Balancing Technique",
    "Model",
    "Accuracy",
    "LS Precision",
    "HS Precision",
    "LS Recall",
    "HS Recall",
    "LS F1 Score",
    "HS F1 Score",
    "ROC AUC",
)
SELECTIONS = ("none", "pearson", "forest_importance", "rfe", "chi2", "mutual_info", "merged_top50")
# selection name -> featsel ranking method
_RANK_METHOD = {
    "pearson": "pearson",
    "forest_importance": "forest_importance",
    "rfe": "rfe_logistic",
    "chi2": "chi2",
    "mutual_info": "mutual_info",
}
SELECTION_LABELS = {
    "none": "None",
    "pearson": "Pearson's Correlation",
    "forest_importance": "Feature Importance Using Random Forest",
    "rfe": "Recursive Feature Elimination Using Logistic Regression",
    "chi2": "Chi-squared Test Statistics",
    "mutual_info": "Discriminative Mutual Information",
    "merged_top50": "Top Ranked Features Merged from Various Feature Selection Methods",
}

# Reduced model sizes for quick full-matrix runs.
FAST_OVERRIDES = {
    "bayes_logit": {"burn_in": 500, "n_keep": 2000, "thin": 4},
    "random_forest": {"n_trees": 50},
    "extra_trees": {"n_trees": 50},
    "gbdt": {"n_rounds": 40},
    "mlp": {"epochs": 15},
}
FAST_LARGE_GBDT_ROUNDS = 120


@dataclass(frozen=True)
class Unsupported:
    name: str


@dataclass(frozen=True)
class DatasetConfig:
    id: int
    selection: str
    balancing: BalanceParams | Unsupported | None
    balancing_label: str = "None"

    def __post_init__(self):
        if self.selection not in SELECTIONS:
            raise ValueError(f"unknown selection {self.selection!r}")

    @property
    def selection_label(self) -> str:
        return SELECTION_LABELS[self.selection]


@dataclass(frozen=True)
class ExperimentPlan:
    dataset_configs: tuple
    model_specs: tuple  # (slot name, ModelSpec) pairs in report order
    split: SplitConfig = SplitConfig()
    top_k: int = 50
    cells: tuple | None = None  # explicit (dataset id, slot) list; None = full cross product

    def cell_list(self) -> list[tuple[DatasetConfig, str, ModelSpec]]:
        specs = dict(self.model_specs)
        by_id = {c.id: c for c in self.dataset_configs}
        if self.cells is not None:
            return [(by_id[d], slot, specs[slot]) for d, slot in self.cells]
        return [(cfg, slot, spec) for cfg in self.dataset_configs for slot, spec in self.model_specs]


def plan_from_table6(split: SplitConfig | None = None, overrides: dict | None = None) -> ExperimentPlan:
    """The 19 training datasets crossed with the 12 model slots.

    ``overrides`` may replace ``models`` (list of slot names), ``datasets``
    (list of ids), ``top_k``, ``hs_weight`` or per-technique BalanceParams
    fields under ``balance``.
    """
    overrides = dict(overrides or {})
    hs = overrides.get("hs_weight", 4.0)
    hs_label = f"High Severity Weight = {hs if isinstance(hs, str) else format(hs, 'g')}"
    bal_extra = overrides.get("balance", {})

    def bp(technique):
        return BalanceParams(technique, **bal_extra.get(technique, {}))

    merged = [
        (8, None, "None"),
        (9, BalanceParams("class_weight", hs_weight=hs), hs_label),
        (10, bp("smote"), "Oversampling Using SMOTE"),
        (11, bp("kmeans_smote"), "Oversampling Using Kmeans-SMOTE"),
        (12, bp("adasyn"), "Oversampling Using ADASYN"),
        (13, bp("random_over"), "Oversampling Using Random-OverSampler"),
        (14, bp("kernel_smote"), "Oversampling Using Kernel-based Synthetic Minority Oversampling (K-SMOTE)"),
        (15, Unsupported("WGAN-GP"), "Oversampling Using WGAN-GP"),
        (16, Unsupported("Conditional WGAN-GP"), "Oversampling Using Conditional WGAN-GP"),
        (17, bp("nearmiss1"), "Undersampling Using NearMiss 1"),
        (18, bp("random_under"), "Undersampling Using Random-UnderSampler"),
        (19, bp("combined"), "Combination of Random-OverSampler and Random-UnderSampler"),
    ]
    configs = [
        DatasetConfig(1, "none", None),
        DatasetConfig(2, "none", BalanceParams("class_weight", hs_weight=hs), hs_label),
        DatasetConfig(3, "pearson", None),
        DatasetConfig(4, "forest_importance", None),
        DatasetConfig(5, "rfe", None),
        DatasetConfig(6, "chi2", None),
        DatasetConfig(7, "mutual_info", None),
    ] + [DatasetConfig(i, "merged_top50", b, label) for i, b, label in merged]
    if "datasets" in overrides:
        keep = set(overrides["datasets"])
        configs = [c for c in configs if c.id in keep]
    slots = overrides.get("models", list(SLOTS))
    unknown = [s for s in slots if s not in SLOTS]
    if unknown:
        raise ValueError(f"unknown model slots {unknown}")
    return ExperimentPlan(
        tuple(configs),
        tuple((s, SLOTS[s]) for s in slots),
        split or SplitConfig(),
        overrides.get("top_k", 50),
    )


# --------------------------------------------------------------------------
# data preparation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineOptions:
    mimic_paper_leakage: bool = False
    cv_before_balance: bool = False
    preset: str = "default"  # or "fast"
    rfe_step: int = 1
    min_abs_r: float = 0.40

    def to_dict(self) -> dict:
        return {
            "mimic_paper_leakage": self.mimic_paper_leakage,
            "cv_before_balance": self.cv_before_balance,
            "preset": self.preset,
            "rfe_step": self.rfe_step,
            "min_abs_r": self.min_abs_r,
        }


@dataclass(frozen=True)
class PreparedData:
    """Split design matrices (interactions appended) plus fitted rankings."""

    train_X: BinaryMatrix
    train_y: np.ndarray
    test_X: BinaryMatrix
    test_y: np.ndarray
    rankings: dict = field(default_factory=dict)  # selection name -> FeatureRanking

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for part in (self.train_X, self.test_X):
            h.update("\x1f".join(part.names).encode())
            h.update(np.ascontiguousarray(part.values).tobytes())
        h.update(np.asarray(self.train_y, dtype=np.int64).tobytes())
        h.update(np.asarray(self.test_y, dtype=np.int64).tobytes())
        return h.hexdigest()[:16]

    def columns_for(self, selection: str, top_k: int = 50):
        if selection == "none":
            return self.train_X.columns
        if selection == "merged_top50":
            merged = featsel.merge_union({s: featsel.top_k(self.rankings[s], top_k) for s in _RANK_METHOD})
            return merged.selected
        return featsel.top_k(self.rankings[selection], top_k)


def encode_table(table: RawTable, labels=None) -> tuple[BinaryMatrix, np.ndarray]:
    cleaned = apply_missing_policy(table)
    matrix, table_labels = one_hot_encode(cleaned)
    y = np.asarray(labels if labels is not None else table_labels, dtype=np.int64)
    return matrix, y


def prepare_data(matrix: BinaryMatrix, y, split: SplitConfig, options: PipelineOptions = PipelineOptions(),
                 seed: int = 0, rank: bool = True) -> PreparedData:
    """70/30 split, interaction gate and the five rankings.

    Interactions and rankings are fit on the training rows unless
    ``mimic_paper_leakage`` asks for the full data.
    """
    y = np.asarray(y, dtype=np.int64)
    tr, te = split_indices(y, split)
    fit_rows = np.arange(y.size) if options.mimic_paper_leakage else tr
    inter = select_interactions(matrix.take_rows(fit_rows), y[fit_rows], options.min_abs_r)
    full = add_interaction_columns(matrix, inter)
    train_X, test_X = full.take_rows(tr), full.take_rows(te)
    rankings = {}
    if rank:
        fit_X, fit_y = full.take_rows(fit_rows), y[fit_rows]
        for sel, method in _RANK_METHOD.items():
            rankings[sel] = featsel.rank(method, fit_X, fit_y, seed=seed, rfe_step=options.rfe_step)
    log.info("prepared %d train / %d test rows, %d columns (%d interactions)", tr.size, te.size,
             full.shape[1], len(inter))
    return PreparedData(train_X, y[tr], test_X, y[te], rankings)


# --------------------------------------------------------------------------
# cells
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CellResult:
    dataset_id: int
    model: str
    selection: str
    balancing: str
    status: str  # "ok" or "skipped"
    reason: str | None = None
    report: MetricsReport | None = None
    cv_summary: dict | None = None  # metric -> [mean, sd]
    train_counts: tuple | None = None  # (n_LS, n_HS) after balancing

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "model": self.model,
            "selection": self.selection,
            "balancing": self.balancing,
            "status": self.status,
            "reason": self.reason,
            "report": self.report.as_dict() if self.report else None,
            "cv_summary": self.cv_summary,
            "train_counts": list(self.train_counts) if self.train_counts else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        return cls(
            d["dataset_id"], d["model"], d["selection"], d["balancing"], d["status"], d.get("reason"),
            MetricsReport(**d["report"]) if d.get("report") else None,
            d.get("cv_summary"),
            tuple(d["train_counts"]) if d.get("train_counts") else None,
        )


def cell_seed(seed: int, dataset_id: int, slot: str) -> int:
    digest = hashlib.sha256(f"{seed}|{dataset_id}|{slot}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def preset_overrides(spec: ModelSpec, preset: str) -> dict:
    if preset == "default":
        return {}
    if preset != "fast":
        raise ValueError(f"unknown preset {preset!r}")
    out = dict(FAST_OVERRIDES.get(spec.kind, {}))
    if spec.kind == "gbdt" and spec.preset == "large":
        out["n_rounds"] = FAST_LARGE_GBDT_ROUNDS
    return out


def _balanced(X, y, params, seed):
    if params is None:
        return X, y, None
    res = apply_balance(X, y, replace(params, seed=seed))
    return res.X, res.y, res.weights


def _fit_eval(spec, X, y, w, X_eval, y_eval, seed, overrides):
    model = train(spec, X, y, TrainConfig(seed=seed, sample_weights=w, overrides=overrides))
    return evaluate(y_eval, model.predict_proba(X_eval))


def _cv_summary(reports: list[MetricsReport]) -> dict:
    out = {}
    for name in REPORT_FIELDS:
        vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        if vals:
            out[name] = [float(np.mean(vals)), float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0]
    return out


def run_cell(cfg: DatasetConfig, slot: str, spec: ModelSpec, data: PreparedData, seed: int,
             options: PipelineOptions = PipelineOptions(), top_k: int = 50, k_folds: int = 5) -> CellResult:
    """Select columns, balance the training rows, cross-validate, refit and
    score on the untouched test rows. ``k_folds=0`` skips cross-validation."""
    head = dict(dataset_id=cfg.id, model=slot, selection=cfg.selection_label, balancing=cfg.balancing_label)
    if isinstance(cfg.balancing, Unsupported):
        return CellResult(**head, status="skipped", reason=cfg.balancing.name)
    overrides = preset_overrides(spec, options.preset)
    try:
        with threadpool_limits(1):
            cols = data.columns_for(cfg.selection, top_k)
            Xtr = data.train_X.select(cols).values
            Xte = data.test_X.select(cols).values
            ytr = data.train_y
            Xb, yb, wb = _balanced(Xtr, ytr, cfg.balancing, seed)
            cv = None
            if k_folds:
                reports = []
                if options.cv_before_balance:
                    for f, (fit_idx, val_idx) in enumerate(fold_indices(ytr, k_folds, seed)):
                        Xf, yf, wf = _balanced(Xtr[fit_idx], ytr[fit_idx], cfg.balancing, seed + f + 1)
                        reports.append(_fit_eval(spec, Xf, yf, wf, Xtr[val_idx], ytr[val_idx], seed, overrides))
                else:
                    for fit_idx, val_idx in fold_indices(yb, k_folds, seed):
                        wf = None if wb is None else wb[fit_idx]
                        reports.append(_fit_eval(spec, Xb[fit_idx], yb[fit_idx], wf, Xb[val_idx], yb[val_idx], seed,
                                                 overrides))
                cv = _cv_summary(reports)
            report = _fit_eval(spec, Xb, yb, wb, Xte, data.test_y, seed, overrides)
    except SevlabError as exc:
        return CellResult(**head, status="skipped", reason=f"{type(exc).__name__}: {exc}")
    n1 = int(np.sum(yb == 1))
    return CellResult(**head, status="ok", report=report, cv_summary=cv, train_counts=(int(yb.size - n1), n1))


# --------------------------------------------------------------------------
# matrix
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultsTable:
    cells: tuple
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "cells": [c.to_dict() for c in self.cells]}

    @classmethod
    def from_dict(cls, d: dict) -> "ResultsTable":
        return cls(tuple(CellResult.from_dict(c) for c in d["cells"]), d.get("metadata", {}))

    def status_counts(self) -> dict:
        out = {"ok": 0, "skipped": 0}
        for c in self.cells:
            out[c.status] += 1
        return out

    def get(self, dataset_id: int, model: str) -> CellResult:
        for c in self.cells:
            if c.dataset_id == dataset_id and c.model == model:
                return c
        raise KeyError((dataset_id, model))


_WORKER_STATE: dict = {}


def _init_worker(data, options, top_k, k_folds):
    _WORKER_STATE.update(data=data, options=options, top_k=top_k, k_folds=k_folds)


def _run_task(task):
    cfg, slot, spec, seed = task
    s = _WORKER_STATE
    return run_cell(cfg, slot, spec, s["data"], seed, s["options"], s["top_k"], s["k_folds"])


def plan_hash(plan: ExperimentPlan, options: PipelineOptions) -> str:
    doc = {
        "datasets": [
            [c.id, c.selection, c.balancing.to_dict() if isinstance(c.balancing, BalanceParams)
             else (c.balancing.name if c.balancing else None)]
            for c in plan.dataset_configs
        ],
        "models": [[s, spec.to_dict()] for s, spec in plan.model_specs],
        "cells": plan.cells,
        "split": [plan.split.train_frac, plan.split.k_folds, plan.split.seed],
        "top_k": plan.top_k,
        "options": options.to_dict(),
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def run_matrix(plan: ExperimentPlan, data: PreparedData, workers: int = 1, seed: int = 0,
               options: PipelineOptions = PipelineOptions()) -> ResultsTable:
    """Run every plan cell. Output order and values do not depend on ``workers``."""
    if workers < 1:
        raise ValueError("workers must be positive")
    tasks = [(cfg, slot, spec, cell_seed(seed, cfg.id, slot)) for cfg, slot, spec in plan.cell_list()]
    k = plan.split.k_folds
    if workers == 1 or len(tasks) <= 1:
        _init_worker(data, options, plan.top_k, k)
        cells = []
        for i, t in enumerate(tasks):
            cells.append(_run_task(t))
            log.info("cell %d/%d dataset %d %s: %s", i + 1, len(tasks), t[0].id, t[1], cells[-1].status)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(data, options, plan.top_k, k)) as pool:
            cells = list(pool.map(_run_task, tasks))
    meta = {"seed": seed, "data_fingerprint": data.fingerprint(), "config_hash": plan_hash(plan, options)}
    return ResultsTable(tuple(cells), meta)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def result_rows(table: ResultsTable) -> list[list[str]]:
    rows = []
    for c in table.cells:
        head = [str(c.dataset_id), c.selection, c.balancing, c.model]
        if c.status != "ok":
            rows.append(head + [f"SKIPPED: {c.reason}"] * 8)
            continue
        vals = [getattr(c.report, f) for f in REPORT_FIELDS]
        rows.append(head + ["" if v is None else f"{v:.2f}" for v in vals])
    return rows


def render_results(table: ResultsTable, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(table.to_dict(), indent=1, sort_keys=True) + "\n"
    rows = result_rows(table)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(RESULT_COLUMNS) + " |", "|" + "---|" * len(RESULT_COLUMNS)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(table: ResultsTable, fmt: str, path) -> None:
    if not table.cells:
        raise ValueError("nothing to emit: empty results table")
    Path(path).write_text(render_results(table, fmt))


def load_results(path) -> ResultsTable:
    try:
        return ResultsTable.from_dict(json.loads(Path(path).read_text()))
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise Malformed(f"{path}: not a JSON results table ({exc})") from exc


# --------------------------------------------------------------------------
# class overlap
# --------------------------------------------------------------------------


def overlap_experiment(matrix: BinaryMatrix, y, seed: int = 0, split: SplitConfig | None = None,
                       options: PipelineOptions = PipelineOptions(), slot: str = "BML", top_k: int = 50) -> dict:
    """Balanced-pool arm versus the standard NearMiss-1 pipeline.

    Both arms use the same model slot and the merged top-k columns fitted by
    the standard pipeline. The balanced-pool arm applies NearMiss-1 to all
    rows and then splits; the standard arm splits first and undersamples the
    training rows only.
    """
    split = split or SplitConfig(seed=seed)
    y = np.asarray(y, dtype=np.int64)
    spec = SLOTS[slot]
    cfg17 = next(c for c in plan_from_table6().dataset_configs if c.id == 17)
    data = prepare_data(matrix, y, split, options, seed=seed)
    standard = run_cell(cfg17, slot, spec, data, seed, options, top_k, k_folds=0)

    cols = data.columns_for("merged_top50", top_k)
    full = add_interaction_columns(matrix, [c for c in data.train_X.columns if c not in set(matrix.columns)])
    pool = apply_balance(full.select(cols).values, y, replace(cfg17.balancing, seed=seed))
    tr, te = split_indices(pool.y, split)
    with threadpool_limits(1):
        model = train(spec, pool.X[tr], pool.y[tr],
                      TrainConfig(seed=seed, overrides=preset_overrides(spec, options.preset)))
        balanced = evaluate(pool.y[te], model.predict_proba(pool.X[te]))
    return {"balanced_pool": balanced, "standard": standard.report}


def render_overlap(result: dict) -> str:
    lines = ["metric,balanced_pool,standard"]
    for f in REPORT_FIELDS:
        a, b = getattr(result["balanced_pool"], f), getattr(result["standard"], f)
        lines.append(f"{f},{'' if a is None else f'{a:.4f}'},{'' if b is None else f'{b:.4f}'}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    split: SplitConfig = SplitConfig()
    source: str = "synthetic"
    marginal_spec: str | None = None
    csv_path: str | None = None
    n_ls: int = 4217
    n_hs: int = 1134
    sampling: str = "quota"
    seed_given: bool = False  # whether the file set ``seed``
    plan: str | list = "table6"
    options: PipelineOptions = PipelineOptions()
    overrides: dict = field(default_factory=dict)


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise Malformed(f"{path}: {exc}") from exc
    return config_from_dict(doc, base=Path(path).parent)


def config_from_dict(doc: dict, base: Path | None = None) -> ExperimentConfig:
    known = {"seed", "split", "data", "plan", "flags", "preset", "rfe_step", "overrides"}
    extra = set(doc) - known
    if extra:
        raise Malformed(f"unknown config keys: {sorted(extra)}")
    seed = int(doc.get("seed", 0))
    sp = doc.get("split", {})
    split = SplitConfig(train_frac=sp.get("train_frac", 0.7), k_folds=sp.get("k_folds", 5), seed=seed)
    data = doc.get("data", {})
    source = data.get("source", "synthetic")
    if source not in ("synthetic", "csv"):
        raise Malformed(f"data.source must be 'synthetic' or 'csv', not {source!r}")

    def resolve(p):
        if p is None or base is None or Path(p).is_absolute():
            return p
        return str(base / p)

    flags = doc.get("flags", {})
    options = PipelineOptions(
        mimic_paper_leakage=bool(flags.get("mimic_paper_leakage", False)),
        cv_before_balance=bool(flags.get("cv_before_balance", False)),
        preset=doc.get("preset", "default"),
        rfe_step=int(doc.get("rfe_step", 1)),
    )
    plan = doc.get("plan", "table6")
    if plan != "table6" and not isinstance(plan, list):
        raise Malformed("plan must be 'table6' or a list of {dataset, model} cells")
    return ExperimentConfig(
        seed=seed, seed_given="seed" in doc, split=split, source=source, marginal_spec=resolve(data.get("marginal_spec")),
        csv_path=resolve(data.get("path")), n_ls=int(data.get("n_ls", 4217)), n_hs=int(data.get("n_hs", 1134)),
        sampling=data.get("sampling", "quota"),
        plan=plan, options=options, overrides=doc.get("overrides", {}),
    )


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    return replace(cfg, seed=seed, split=replace(cfg.split, seed=seed))


def load_dataset(cfg: ExperimentConfig) -> tuple[BinaryMatrix, np.ndarray]:
    spec = load_marginal_spec(cfg.marginal_spec)
    if cfg.source == "csv":
        if not cfg.csv_path:
            raise Malformed("data.path is required for csv sources")
        table = read_raw_csv(cfg.csv_path, spec.schema)
        return encode_table(table)
    synth = SyntheticConfig(n_ls=cfg.n_ls, n_hs=cfg.n_hs, seed=cfg.seed, method=cfg.sampling)
    table, labels = sample_dataset(spec, synth)
    return encode_table(table, labels)


def build_plan(cfg: ExperimentConfig) -> ExperimentPlan:
    plan = plan_from_table6(cfg.split, cfg.overrides)
    if cfg.plan == "table6":
        return plan
    cells = []
    ids = {c.id for c in plan.dataset_configs}
    slots = dict(plan.model_specs)
    for item in cfg.plan:
        d, m = int(item["dataset"]), item["model"]
        if d not in ids or m not in slots:
            raise Malformed(f"unknown plan cell {item}")
        cells.append((d, m))
    return replace(plan, cells=tuple(cells))


def run_from_config(cfg: ExperimentConfig, workers: int = 1) -> ResultsTable:
    matrix, y = load_dataset(cfg)
    data = prepare_data(matrix, y, cfg.split, cfg.options, seed=cfg.seed)
    return run_matrix(build_plan(cfg), data, workers=workers, seed=cfg.seed, options=cfg.options)


__all__ = [
    "RESULT_COLUMNS",
    "DatasetConfig",
    "ExperimentPlan",
    "ExperimentConfig",
    "PipelineOptions",
    "PreparedData",
    "CellResult",
    "ResultsTable",
    "Unsupported",
    "plan_from_table6",
    "prepare_data",
    "encode_table",
    "run_cell",
    "run_matrix",
    "cell_seed",
    "render_results",
    "emit_results",
    "load_results",
    "overlap_experiment",
    "render_overlap",
    "load_config",
    "config_from_dict",
    "load_dataset",
    "build_plan",
    "run_from_config",
]
