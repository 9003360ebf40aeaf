"""Confusion counts, per-class precision/recall/F1, accuracy and ROC AUC.

HS (label 1) is the positive class; LS metrics come from the mirrored
matrix. Zero denominators yield 0 rather than NaN.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyMatrix, LengthMismatch, NonFinite, SingleClass

REPORT_FIELDS = ("accuracy", "ls_precision", "hs_precision", "ls_recall", "hs_recall", "ls_f1", "hs_f1", "roc_auc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def mirrored(self) -> "ConfusionMatrix":
        """Same predictions seen with LS as the positive class."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, tn=self.tp, fn=self.fp)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    ls_precision: float
    hs_precision: float
    ls_recall: float
    hs_recall: float
    ls_f1: float
    hs_f1: float
    roc_auc: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = np.asarray(y_true).astype(np.int64).ravel()
    p = np.asarray(y_pred).astype(np.int64).ravel()
    if t.size != p.size:
        raise LengthMismatch(f"{t.size} labels vs {p.size} predictions")
    if not (np.isin(t, (0, 1)).all() and np.isin(p, (0, 1)).all()):
        raise ValueError("labels must be 0 or 1")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    tn = int(np.sum((t == 0) & (p == 0)))
    return ConfusionMatrix(tp, fp, tn, t.size - tp - fp - tn)


def _ratio(num, den) -> float:
    return num / den if den > 0 else 0.0


def _prf(cm: ConfusionMatrix) -> tuple[float, float, float]:
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return precision, recall, f1


def classification_metrics(cm: ConfusionMatrix, auc: float | None = None) -> MetricsReport:
    if cm.total <= 0:
        raise EmptyMatrix("no evaluated rows")
    hs_p, hs_r, hs_f = _prf(cm)
    ls_p, ls_r, ls_f = _prf(cm.mirrored())
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        ls_precision=ls_p,
        hs_precision=hs_p,
        ls_recall=ls_r,
        hs_recall=hs_r,
        ls_f1=ls_f,
        hs_f1=hs_f,
        roc_auc=auc,
    )


def roc_auc(y_true, scores) -> float:
    """Normalized Mann-Whitney U: P(score_HS > score_LS) with ties counting 1/2."""
    y = np.asarray(y_true).astype(np.int64).ravel()
    s = np.asarray(scores, dtype=np.float64).ravel()
    if y.size != s.size:
        raise LengthMismatch(f"{y.size} labels vs {s.size} scores")
    if not np.isfinite(s).all():
        raise NonFinite("scores must be finite")
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise SingleClass("ROC AUC needs both classes")
    ranks = rankdata(s)  # average ranks give ties half credit
    u = ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def evaluate(y_true, probs, threshold: float = 0.5) -> MetricsReport:
    """All report fields from predicted HS probabilities."""
    y = np.asarray(y_true).astype(np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    cm = confusion(y, (probs >= threshold).astype(np.int64))
    try:
        auc = roc_auc(y, probs)
    except SingleClass:
        auc = None
    return classification_metrics(cm, auc)


__all__ = [
    "REPORT_FIELDS",
    "ConfusionMatrix",
    "MetricsReport",
    "confusion",
    "classification_metrics",
    "roc_auc",
    "evaluate",
]
