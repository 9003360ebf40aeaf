"""Synthetic crash tables drawn from published per-class category counts.

Features are sampled independently given the class, so the generator
reproduces every class-conditional marginal but none of the joint structure.
The default ``quota`` method fixes each (feature, class) category count to
n * p rounded up or down at random and shuffles it into place; ``iid`` draws
every cell independently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import InconsistentTotals, Malformed
from .tabular import Feature, FeatureSchema, RawTable

DEFAULT_N_LS = 4217
DEFAULT_N_HS = 1134
SAMPLING_METHODS = ("quota", "iid")


@dataclass(frozen=True)
class CategoryCount:
    code: int
    name: str
    ls_count: int
    hs_count: int


@dataclass(frozen=True)
class FeatureMarginal:
    header: str
    name: str
    categories: tuple[CategoryCount, ...]

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(c.code for c in self.categories)

    def counts(self, cls: int) -> np.ndarray:
        attr = "hs_count" if cls == 1 else "ls_count"
        return np.array([getattr(c, attr) for c in self.categories], dtype=np.float64)

    def probabilities(self, cls: int) -> np.ndarray:
        counts = self.counts(cls)
        return counts / counts.sum()


@dataclass(frozen=True)
class ClassMarginalSpec:
    total_ls: int
    total_hs: int
    features: tuple[FeatureMarginal, ...]

    @property
    def schema(self) -> FeatureSchema:
        return FeatureSchema(tuple(Feature(f.header, f.name, f.codes) for f in self.features))

    def __getitem__(self, header: str) -> FeatureMarginal:
        for f in self.features:
            if f.header == header:
                return f
        raise KeyError(header)


@dataclass(frozen=True)
class SyntheticConfig:
    n_ls: int = DEFAULT_N_LS
    n_hs: int = DEFAULT_N_HS
    seed: int = 0
    method: str = "quota"  # or "iid"

    def __post_init__(self):
        if self.n_ls < 1 or self.n_hs < 1:
            raise ValueError("n_ls and n_hs must both be at least 1")
        if self.method not in SAMPLING_METHODS:
            raise ValueError(f"method must be one of {SAMPLING_METHODS}")


def default_spec_path() -> Path:
    """Location of the shipped transcription of the published marginals."""
    return Path(str(resources.files("sevlab") / "data" / "marginals.json"))


def load_marginal_spec(path=None) -> ClassMarginalSpec:
    path = default_spec_path() if path is None else Path(path)
    text = path.read_text()
    if not text.strip():
        raise Malformed(f"{path} is empty")
    try:
        doc = json.loads(text)
        features = []
        for f in doc["features"]:
            cats = tuple(
                CategoryCount(int(c["code"]), str(c.get("name", c["code"])), int(c["ls_count"]), int(c["hs_count"]))
                for c in f["categories"]
            )
            features.append(FeatureMarginal(str(f["header"]), str(f.get("name", f["header"])), cats))
        total_ls = doc.get("total_ls")
        total_hs = doc.get("total_hs")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise Malformed(f"cannot parse marginal spec {path}: {exc}") from exc
    if not features:
        raise Malformed(f"{path} declares no features")

    for f in features:
        if not f.categories:
            raise Malformed(f"feature {f.header!r} has no categories")
        if any(c.ls_count < 0 or c.hs_count < 0 for c in f.categories):
            raise Malformed(f"feature {f.header!r} has a negative count")
    if total_ls is None:
        total_ls = int(features[0].counts(0).sum())
    if total_hs is None:
        total_hs = int(features[0].counts(1).sum())
    for f in features:
        ls, hs = int(f.counts(0).sum()), int(f.counts(1).sum())
        if ls != total_ls or hs != total_hs:
            raise InconsistentTotals(f.header, f"(LS {ls} vs {total_ls}, HS {hs} vs {total_hs})")
    spec = ClassMarginalSpec(int(total_ls), int(total_hs), tuple(features))
    spec.schema  # duplicate headers / codes surface here
    return spec


def systematic_counts(p, n: int, rng) -> np.ndarray:
    """Category counts summing to ``n``, each floor or ceil of ``n * p`` with
    expectation exactly ``n * p`` (systematic sampling with one uniform)."""
    cum = np.concatenate([[0.0], np.cumsum(np.asarray(p, dtype=np.float64) * n)])
    cum[-1] = n
    points = rng.random() + np.arange(n)
    return np.diff(np.searchsorted(points, cum, side="left"))


def sample_dataset(spec: ClassMarginalSpec, cfg: SyntheticConfig) -> tuple[RawTable, np.ndarray]:
    """Draw ``n_ls`` LS rows and ``n_hs`` HS rows in a seed-shuffled order."""
    rng = np.random.default_rng(cfg.seed)
    labels = np.concatenate([np.zeros(cfg.n_ls, dtype=np.int64), np.ones(cfg.n_hs, dtype=np.int64)])
    labels = rng.permutation(labels)
    codes = np.empty((labels.size, len(spec.features)), dtype=np.int64)
    for j, feat in enumerate(spec.features):
        values = np.array(feat.codes, dtype=np.int64)
        for cls in (0, 1):
            rows = labels == cls
            n = int(rows.sum())
            p = feat.probabilities(cls)
            if cfg.method == "iid":
                codes[rows, j] = rng.choice(values, size=n, p=p)
            else:
                codes[rows, j] = rng.permutation(np.repeat(values, systematic_counts(p, n, rng)))
    table = RawTable(spec.schema, codes, labels)
    return table, table.labels


@dataclass(frozen=True)
class FitRow:
    header: str
    cls: int
    statistic: float
    dof: int
    p_value: float
    n_buckets: int


def marginal_fit_report(table: RawTable, labels, spec: ClassMarginalSpec, min_expected: float = 5.0) -> list[FitRow]:
    """Chi-squared goodness of fit of every (feature, class) marginal.

    Categories whose expected count falls below ``min_expected`` are pooled
    into one bucket before the statistic is formed.
    """
    labels = np.asarray(labels)
    out = []
    for feat in spec.features:
        col = table.column(feat.header)
        for cls in (0, 1):
            obs_codes = col[labels == cls]
            n = obs_codes.size
            observed = np.array([(obs_codes == c).sum() for c in feat.codes], dtype=np.float64)
            expected = n * feat.probabilities(cls)
            small = expected < min_expected
            obs_b = list(observed[~small])
            exp_b = list(expected[~small])
            if small.any():
                obs_b.append(observed[small].sum())
                exp_b.append(expected[small].sum())
            obs_b, exp_b = np.array(obs_b), np.array(exp_b)
            live = exp_b > 0
            if (obs_b[~live] > 0).any():
                statistic = float("inf")
            else:
                statistic = float((((obs_b - exp_b) ** 2)[live] / exp_b[live]).sum())
            dof = max(int(live.sum()) - 1, 0)
            p = float(stats.chi2.sf(statistic, dof)) if dof > 0 else (1.0 if statistic == 0 else 0.0)
            out.append(FitRow(feat.header, cls, statistic, dof, p, int(live.sum())))
    return out


__all__ = [
    "CategoryCount",
    "FeatureMarginal",
    "ClassMarginalSpec",
    "SyntheticConfig",
    "SAMPLING_METHODS",
    "systematic_counts",
    "FitRow",
    "default_spec_path",
    "load_marginal_spec",
    "sample_dataset",
    "marginal_fit_report",
]
