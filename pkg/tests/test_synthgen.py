import json

import numpy as np
import pytest
from scipy import stats

from sevlab.errors import InconsistentTotals, Malformed
from sevlab.synthgen import SyntheticConfig, load_marginal_spec, marginal_fit_report, sample_dataset
from sevlab.tabular import RawTable


def _write_spec(path, features, total_ls=None, total_hs=None):
    doc = {"features": features}
    if total_ls is not None:
        doc.update(total_ls=total_ls, total_hs=total_hs)
    path.write_text(json.dumps(doc))
    return path


def test_shipped_spec_totals(spec):
    assert (spec.total_ls, spec.total_hs) == (4217, 1134)
    for f in spec.features:
        assert f.counts(0).sum() == 4217
        assert f.counts(1).sum() == 1134
    assert len(spec.features) == 41
    assert spec["RSC"].categories[0].ls_count == 3785


def test_inconsistent_totals_and_malformed(tmp_path):
    feats = [
        {"header": "A", "categories": [{"code": 1, "ls_count": 3000, "hs_count": 10}, {"code": 2, "ls_count": 1217, "hs_count": 5}]},
        {"header": "B", "categories": [{"code": 1, "ls_count": 4000, "hs_count": 15}]},
    ]
    with pytest.raises(InconsistentTotals) as err:
        load_marginal_spec(_write_spec(tmp_path / "s.json", feats))
    assert err.value.header == "B"
    empty = tmp_path / "empty.json"
    empty.write_text("")
    with pytest.raises(Malformed):
        load_marginal_spec(empty)


def test_sample_counts_frequency_and_determinism(spec):
    cfg = SyntheticConfig(seed=5)
    table, labels = sample_dataset(spec, cfg)
    assert (np.sum(labels == 0), np.sum(labels == 1)) == (4217, 1134)
    dry = np.mean(table.column("RSC")[labels == 0] == 1)
    assert abs(dry - 3785 / 4217) <= 0.02
    again, _ = sample_dataset(spec, cfg)
    assert again.equals(table)
    assert not sample_dataset(spec, SyntheticConfig(seed=6))[0].equals(table)


def test_single_category_feature_is_constant(tmp_path):
    feats = [{"header": "A", "categories": [{"code": 7, "ls_count": 5, "hs_count": 2}]}]
    spec = load_marginal_spec(_write_spec(tmp_path / "s.json", feats))
    table, _ = sample_dataset(spec, SyntheticConfig(n_ls=30, n_hs=10, seed=0))
    assert (table.column("A") == 7).all()


def test_marginals_converge_at_large_n(spec):
    table, labels = sample_dataset(spec, SyntheticConfig(n_ls=50_000, n_hs=50_000, seed=2))
    for f in spec.features:
        col = table.column(f.header)
        for cls in (0, 1):
            observed = np.array([np.mean(col[labels == cls] == c) for c in f.codes])
            assert np.max(np.abs(observed - f.probabilities(cls))) <= 0.01


def test_fit_report_under_generator(spec):
    table, labels = sample_dataset(spec, SyntheticConfig(seed=9))
    report = marginal_fit_report(table, labels, spec)
    assert len(report) == 2 * len(spec.features)
    below = [r.statistic <= stats.chi2.ppf(0.999, r.dof) for r in report if r.dof > 0]
    assert np.mean(below) >= 0.95


def test_fit_report_exact_counts_give_zero(tmp_path):
    feats = [
        {"header": "A", "categories": [{"code": 1, "ls_count": 6, "hs_count": 2}, {"code": 2, "ls_count": 4, "hs_count": 8}]},
        {"header": "B", "categories": [{"code": 1, "ls_count": 10, "hs_count": 10}]},
    ]
    spec = load_marginal_spec(_write_spec(tmp_path / "s.json", feats))
    labels = np.array([0] * 10 + [1] * 10)
    a = [1] * 6 + [2] * 4 + [1] * 2 + [2] * 8
    table = RawTable(spec.schema, np.column_stack([a, np.ones(20)]), labels)
    assert all(r.statistic == 0 for r in marginal_fit_report(table, labels, spec, min_expected=0))


def test_fit_report_flags_permuted_feature(spec):
    table, labels = sample_dataset(spec, SyntheticConfig(seed=4))
    j = table.schema.headers.index("RSC")
    codes = np.array(table.codes)
    col = codes[:, j]
    # swap the dominant category with a rare one
    codes[:, j] = np.where(col == 1, 9, np.where(col == 9, 1, col))
    report = marginal_fit_report(RawTable(table.schema, codes, labels), labels, spec)
    worst = max(report, key=lambda r: r.statistic)
    assert worst.header == "RSC"


def test_systematic_counts_rounding_and_mean():
    from sevlab.synthgen import systematic_counts

    p = np.array([0.5, 0.3, 0.15, 0.04, 0.01])
    rng = np.random.default_rng(0)
    draws = np.array([systematic_counts(p, 37, rng) for _ in range(20_000)])
    assert (draws.sum(axis=1) == 37).all()
    assert ((draws == np.floor(37 * p)) | (draws == np.ceil(37 * p))).all()
    np.testing.assert_allclose(draws.mean(axis=0), 37 * p, atol=0.02)


def test_iid_method_marginals(spec):
    table, labels = sample_dataset(spec, SyntheticConfig(n_ls=50_000, n_hs=50_000, seed=3, method="iid"))
    for feat in spec.features[:10]:
        col = table.column(feat.header)
        for cls in (0, 1):
            freq = np.array([(col[labels == cls] == c).mean() for c in feat.codes])
            assert np.abs(freq - feat.probabilities(cls)).max() <= 0.01
    with pytest.raises(ValueError):
        SyntheticConfig(method="copula")
