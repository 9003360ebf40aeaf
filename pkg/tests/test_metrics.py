import numpy as np
import pytest

from sevlab import metrics as mt
from sevlab.errors import EmptyMatrix, LengthMismatch, NonFinite, SingleClass


def _brute_auc(y, s):
    pos = [v for v, t in zip(s, y) if t == 1]
    neg = [v for v, t in zip(s, y) if t == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


def test_worked_example():
    cm = mt.ConfusionMatrix(tp=30, fp=10, tn=50, fn=10)
    r = mt.classification_metrics(cm)
    assert r.accuracy == pytest.approx(0.8)
    assert r.hs_precision == pytest.approx(0.75)
    assert r.hs_recall == pytest.approx(0.75)
    assert r.ls_precision == pytest.approx(50 / 60)
    assert r.ls_recall == pytest.approx(50 / 60)
    assert r.hs_f1 == pytest.approx(0.75)


def test_zero_denominators():
    r = mt.classification_metrics(mt.ConfusionMatrix(tp=0, fp=0, tn=5, fn=0))
    assert (r.hs_precision, r.hs_recall, r.hs_f1) == (0.0, 0.0, 0.0)
    assert r.ls_recall == 1.0 and r.accuracy == 1.0
    with pytest.raises(EmptyMatrix):
        mt.classification_metrics(mt.ConfusionMatrix(0, 0, 0, 0))


def test_random_matrices_against_definitions(rng):
    for _ in range(1000):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 20, size=4))
        if tp + fp + tn + fn == 0:
            continue
        r = mt.classification_metrics(mt.ConfusionMatrix(tp, fp, tn, fn))
        p = tp / (tp + fp) if tp + fp else 0.0
        q = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        assert r.hs_precision == pytest.approx(p)
        assert r.hs_recall == pytest.approx(q)
        assert r.hs_f1 == pytest.approx(f)
        lp = tn / (tn + fn) if tn + fn else 0.0
        assert r.ls_precision == pytest.approx(lp)
        assert r.accuracy == pytest.approx((tp + tn) / (tp + fp + tn + fn))
        for v in r.as_dict().values():
            assert v is None or 0.0 <= v <= 1.0


def test_confusion_counts():
    cm = mt.confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
    assert (cm.tp, cm.fp, cm.tn, cm.fn) == (2, 1, 1, 1)
    with pytest.raises(LengthMismatch):
        mt.confusion([1, 0], [1])


def test_auc_matches_brute_force(rng):
    for _ in range(200):
        n = int(rng.integers(2, 40))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        s = rng.integers(0, 5, size=n) / 4.0  # coarse scores force ties
        assert mt.roc_auc(y, s) == pytest.approx(_brute_auc(y, s))


def test_auc_identities(rng):
    y = np.array([0, 0, 1, 1, 0, 1])
    s = rng.random(6)
    assert mt.roc_auc(y, s) + mt.roc_auc(y, -s) == pytest.approx(1.0)
    assert mt.roc_auc(y, np.full(6, 0.3)) == 0.5
    assert mt.roc_auc(y, y.astype(float)) == 1.0
    with pytest.raises(SingleClass):
        mt.roc_auc([1, 1], [0.1, 0.2])
    with pytest.raises(NonFinite):
        mt.roc_auc([0, 1], [0.1, np.nan])


def test_evaluate_threshold_and_single_class():
    r = mt.evaluate([0, 1, 1], [0.2, 0.5, 0.49])
    assert r.hs_recall == 0.5 and r.roc_auc == 1.0
    r = mt.evaluate([1, 1], [0.9, 0.1])
    assert r.roc_auc is None and r.hs_recall == 0.5
    assert tuple(r.as_dict()) == mt.REPORT_FIELDS
