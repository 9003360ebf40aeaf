import math

import numpy as np
import pytest

from sevlab import balance as B
from sevlab.errors import TooFewMinority


def _params(tech, **kw):
    return B.BalanceParams(tech, **kw)


def _brute_nearmiss(X, y, keep, k=3):
    maj = [i for i in range(len(y)) if y[i] == 0]
    mino = [i for i in range(len(y)) if y[i] == 1]
    kk = min(k, len(mino))
    scored = []
    for i in maj:
        d = sorted(math.dist(X[i], X[j]) for j in mino)
        scored.append((sum(d[:kk]) / kk, i))
    scored.sort()
    return {i for _, i in scored[:keep]}


def test_class_weights():
    np.testing.assert_array_equal(B.class_weights([0, 0, 0, 0, 1]).weights, [1, 1, 1, 1, 4])
    np.testing.assert_array_equal(B.class_weights([0, 1, 1], 1.0).weights, [1, 1, 1])
    np.testing.assert_array_equal(B.class_weights([0, 0]).weights, [1, 1])


def test_random_oversample_contract():
    X = np.arange(20, dtype=float).reshape(10, 2)
    y = np.array([0] * 8 + [1] * 2)
    res = B.random_oversample(X, y, _params("random_over", seed=1))
    assert res.counts() == (8, 8)
    np.testing.assert_array_equal(res.X[:10], X)
    for row, src in zip(res.X[10:], res.source[10:, 0]):
        assert src in (8, 9)
        np.testing.assert_array_equal(row, X[src])
    assert res.origin_names[10:] == ["duplicated"] * 6
    again = B.random_oversample(X, y, _params("random_over", seed=1))
    np.testing.assert_array_equal(again.X, res.X)
    bal = np.array([0, 1] * 4)
    same = B.random_oversample(X[:8], bal, _params("random_over"))
    np.testing.assert_array_equal(same.X, X[:8])


def test_random_undersample_contract():
    X = np.arange(10, dtype=float)[:, None]
    y = np.array([0] * 8 + [1] * 2)
    res = B.random_undersample(X, y, _params("random_under", seed=3))
    assert res.counts() == (2, 2)
    kept = res.source[:, 0]
    assert {8, 9} <= set(kept)
    assert len(set(kept)) == len(kept)
    with pytest.raises(ValueError):
        B.random_undersample(X, y, _params("random_under", target_ratio=0.1))


def test_combined_examples():
    X = np.arange(10, dtype=float)[:, None]
    res = B.combined_over_under(X, np.array([0] * 8 + [1] * 2), _params("combined", seed=0))
    assert res.counts() == (5, 5)
    res = B.combined_over_under(X, np.array([0] * 5 + [1] * 5), _params("combined"))
    assert res.counts() == (5, 5)
    assert sorted(res.source[:, 0]) == list(range(10))
    res = B.combined_over_under(np.zeros((11, 1)), np.array([0] * 8 + [1] * 3), _params("combined"))
    n0, n1 = res.counts()
    assert abs(n0 - n1) <= 1


def test_smote_segment_and_neighbors():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
    y = np.array([1, 1, 0, 0, 0])
    res = B.smote(X, y, _params("smote", k_neighbors=1, target_ratio=1.0, seed=2))
    new = res.X[5:]
    assert new.shape == (1, 2)
    assert new[0, 0] == new[0, 1] and 0.0 <= new[0, 0] <= 1.0


def test_knn_matches_brute_force(rng):
    X = rng.random((10, 3))
    got = B.knn_indices(X, X, 3, exclude_self=True)
    for i in range(10):
        order = sorted((math.dist(X[i], X[j]), j) for j in range(10) if j != i)
        assert list(got[i]) == [j for _, j in order[:3]]


def test_smote_family_betweenness(rng):
    X = (rng.random((60, 5)) < 0.5).astype(float)
    y = np.array([0] * 45 + [1] * 15)
    for tech in ("smote", "kmeans_smote", "adasyn"):
        res = B.apply_balance(X, y, _params(tech, seed=7, n_clusters=3))
        gen = res.origin == B.SYNTHETIC
        a, b = X[res.source[gen, 0]], X[res.source[gen, 1]]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        assert ((res.X[gen] >= lo - 1e-12) & (res.X[gen] <= hi + 1e-12)).all()
        assert (y[res.source[gen]] == 1).all()


def test_too_few_minority():
    X = np.zeros((5, 2))
    y = np.array([0, 0, 0, 0, 1])
    for tech in ("smote", "kmeans_smote", "adasyn"):
        with pytest.raises(TooFewMinority):
            B.apply_balance(X, y, _params(tech))


def test_kmeans_smote_locality():
    rng = np.random.default_rng(0)
    maj = rng.random((40, 2)) * 0.2
    mino = 10 + rng.random((12, 2)) * 0.5
    X = np.vstack([maj, mino])
    y = np.array([0] * 40 + [1] * 12)
    res = B.kmeans_smote(X, y, _params("kmeans_smote", n_clusters=2, seed=1))
    gen = res.X[res.origin == B.SYNTHETIC]
    assert gen.shape[0] == 28
    assert (gen >= mino.min(axis=0) - 1e-12).all() and (gen <= mino.max(axis=0) + 1e-12).all()


def test_kmeans_smote_falls_back_to_smote(rng):
    # minority spread thinly among majority rows: no cluster is minority dominated
    X = rng.random((100, 3))
    y = np.zeros(100, dtype=int)
    y[::10] = 1
    p = _params("kmeans_smote", n_clusters=2, seed=5)
    a = B.kmeans_smote(X, y, p)
    b = B.smote(X, y, p)
    np.testing.assert_array_equal(a.X, b.X)


def test_adasyn_uniform_when_no_hard_points():
    X = np.array([[0.0], [0.1], [0.2], [10.0], [10.1], [10.2], [10.3]])
    y = np.array([1, 1, 1, 0, 0, 0, 0])
    r = B.adasyn_hardness(X, y, 1, 2)
    assert (r == 0).all()
    res = B.adasyn(X, y, _params("adasyn", k_neighbors=2, seed=0))
    assert res.counts() == (4, 4)


def test_adasyn_hard_point_gets_more():
    # row 0 is surrounded by majority rows; rows 1-3 form a minority clump
    X = np.array([[0.0], [20.0], [20.1], [20.2], [0.1], [0.2], [-0.1], [-0.2], [5.0], [5.1], [5.2], [5.3]])
    y = np.array([1, 1, 1, 1] + [0] * 8)
    r = B.adasyn_hardness(X, y, 1, 3)
    np.testing.assert_allclose(r[:4], [1.0, 1 / 3, 1 / 3, 1 / 3])
    res = B.adasyn(X, y, _params("adasyn", k_neighbors=3, seed=0))
    gen = res.origin == B.SYNTHETIC
    # G = 4 split 2 : 2/3 : 2/3 : 2/3 by largest remainder
    assert np.bincount(res.source[gen, 0], minlength=4)[:4].tolist() == [2, 1, 1, 0]


def test_kernel_smote_bandwidth(rng):
    X = (rng.random((50, 20)) < 0.5).astype(float)
    y = np.array([0] * 45 + [1] * 5)
    res = B.kernel_smote(X, y, _params("kernel_smote", bandwidth=0.0, seed=1))
    gen = res.origin == B.SYNTHETIC
    np.testing.assert_array_equal(res.X[gen], X[res.source[gen, 0]])

    h, d = 0.1, 20
    big_y = np.array([0] * 10_040 + [1] * 40)
    bigX = (rng.random((big_y.size, d)) < 0.5).astype(float)
    res = B.kernel_smote(bigX, big_y, _params("kernel_smote", bandwidth=h, seed=2))
    gen = res.origin == B.SYNTHETIC
    ham = np.abs(res.X[gen] - bigX[res.source[gen, 0]]).sum(axis=1)
    n = ham.size
    sigma = math.sqrt(d * h * (1 - h) / n)
    assert n >= 10_000
    assert abs(ham.mean() - h * d) <= 3 * sigma


def test_nearmiss_examples():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [5.0, 5.0]])
    y = np.array([1, 0, 0, 0])
    res = B.nearmiss1(X, y, _params("nearmiss1"))
    assert set(res.source[:, 0]) == {0, 1}
    X = np.arange(8, dtype=float)[:, None]
    y = np.array([0, 0, 1, 0, 1, 0, 1, 0])
    res = B.nearmiss1(X, y, _params("nearmiss1", target_ratio=3 / 5))
    np.testing.assert_array_equal(res.X, X)


def test_nearmiss_brute_force(rng):
    for _ in range(30):
        n = int(rng.integers(6, 50))
        X = (rng.random((n, 4)) < 0.5).astype(float) if rng.random() < 0.5 else rng.random((n, 4))
        n_min = int(rng.integers(1, n // 2))
        y = np.zeros(n, dtype=int)
        y[rng.choice(n, n_min, replace=False)] = 1
        res = B.nearmiss1(X, y, _params("nearmiss1"))
        kept = {int(i) for i in res.source[:, 0] if y[i] == 0}
        assert kept == _brute_nearmiss(X, y, n_min)


def test_all_techniques_deterministic(rng):
    X = (rng.random((40, 4)) < 0.5).astype(float)
    y = np.array([0] * 30 + [1] * 10)
    for tech in B.TECHNIQUES:
        a = B.apply_balance(X, y, _params(tech, seed=3, n_clusters=3))
        b = B.apply_balance(X, y, _params(tech, seed=3, n_clusters=3))
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.origin, b.origin)


def test_params_validation():
    with pytest.raises(ValueError):
        B.BalanceParams("wgan")
    with pytest.raises(ValueError):
        B.BalanceParams("smote", target_ratio=0)
    with pytest.raises(ValueError):
        B.BalanceParams("kernel_smote", bandwidth=1.5)
    assert B.BalanceParams("nearmiss1").k == 3
    assert B.BalanceParams("smote").k == 5
