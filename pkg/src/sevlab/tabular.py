"""Categorical data model, missing-value policy, one-hot encoding, interaction
terms and stratified splitting."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyClass,
    IntermediateMissingness,
    KTooLarge,
    Malformed,
    SchemaError,
    UnknownCategory,
)

MISSING = -1
LABEL_HEADER = "SEV"
LS, HS = 0, 1


# --------------------------------------------------------------------------
# schema
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Feature:
    header: str
    name: str
    categories: tuple[int, ...]

    def __post_init__(self):
        if not self.categories:
            raise SchemaError(f"feature {self.header!r} has no categories")
        if len(set(self.categories)) != len(self.categories):
            raise SchemaError(f"feature {self.header!r} repeats a category code")
        if any(c < 0 for c in self.categories):
            raise SchemaError(f"feature {self.header!r} has a negative category code")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        headers = [f.header for f in self.features]
        if len(set(headers)) != len(headers):
            raise SchemaError("feature headers must be unique")
        if LABEL_HEADER in headers:
            raise SchemaError(f"{LABEL_HEADER} is reserved for the label")

    @property
    def headers(self) -> tuple[str, ...]:
        return tuple(f.header for f in self.features)

    def __getitem__(self, header: str) -> Feature:
        for f in self.features:
            if f.header == header:
                return f
        raise KeyError(header)

    def restrict(self, headers: Iterable[str]) -> "FeatureSchema":
        return FeatureSchema(tuple(self[h] for h in headers))

    @property
    def n_columns(self) -> int:
        return sum(len(f.categories) for f in self.features)

    @classmethod
    def from_json(cls, path) -> "FeatureSchema":
        """Read a schema from a marginal-spec style JSON file.

        Categories may be plain integer codes or objects with a ``code`` key.
        """
        try:
            doc = json.loads(Path(path).read_text())
            feats = []
            for f in doc["features"]:
                codes = tuple(int(c["code"]) if isinstance(c, dict) else int(c) for c in f["categories"])
                feats.append(Feature(str(f["header"]), str(f.get("name", f["header"])), codes))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise Malformed(f"cannot read schema from {path}: {exc}") from exc
        return cls(tuple(feats))


# --------------------------------------------------------------------------
# raw categorical table
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RawTable:
    """Integer category codes, one column per schema feature.

    ``codes`` holds :data:`MISSING` for empty cells. ``labels`` is the SEV
    column (0 = LS, 1 = HS) when the table carries one.
    """

    schema: FeatureSchema
    codes: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        codes = np.array(self.codes, dtype=np.int64, copy=True)
        if codes.ndim != 2 or codes.shape[1] != len(self.schema.features):
            raise SchemaError("codes must be an (n_rows, n_features) array matching the schema")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        if self.labels is not None:
            labels = np.array(self.labels, dtype=np.int64, copy=True)
            if labels.shape != (codes.shape[0],):
                raise SchemaError("labels must have one entry per row")
            if not np.isin(labels, (LS, HS)).all():
                raise SchemaError("labels must be 0 (LS) or 1 (HS)")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def column(self, header: str) -> np.ndarray:
        return self.codes[:, self.schema.headers.index(header)]

    def validate(self) -> None:
        for j, feat in enumerate(self.schema.features):
            col = self.codes[:, j]
            bad = ~np.isin(col, feat.categories) & (col != MISSING)
            if bad.any():
                raise UnknownCategory(feat.header, int(col[bad][0]))

    def equals(self, other: "RawTable") -> bool:
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None and other.labels is not None and np.array_equal(self.labels, other.labels)
        )
        return self.schema == other.schema and np.array_equal(self.codes, other.codes) and same_labels


def read_raw_csv(path, schema: FeatureSchema) -> RawTable:
    """Read a CSV of integer codes; an empty cell is a missing value."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise Malformed(f"{path} is empty") from None
        rows = [r for r in reader if r]
    header = [h.strip() for h in header]
    label_pos = header.index(LABEL_HEADER) if LABEL_HEADER in header else None
    feat_headers = [h for h in header if h != LABEL_HEADER]
    unknown = [h for h in feat_headers if h not in schema.headers]
    if unknown:
        raise SchemaError(f"columns not declared in the schema: {', '.join(unknown)}")
    sub = schema.restrict(feat_headers)
    positions = [i for i, h in enumerate(header) if h != LABEL_HEADER]
    codes = np.empty((len(rows), len(positions)), dtype=np.int64)
    labels = np.empty(len(rows), dtype=np.int64) if label_pos is not None else None
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise Malformed(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        try:
            for j, p in enumerate(positions):
                cell = row[p].strip()
                codes[i, j] = MISSING if cell == "" else int(cell)
            if labels is not None:
                labels[i] = int(row[label_pos])
        except ValueError as exc:
            raise Malformed(f"{path}: row {i + 2}: {exc}") from exc
    return RawTable(sub, codes, labels)


def write_raw_csv(table: RawTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(table.schema.headers)
        if table.labels is not None:
            header.append(LABEL_HEADER)
        w.writerow(header)
        for i in range(table.n_rows):
            row = ["" if c == MISSING else str(int(c)) for c in table.codes[i]]
            if table.labels is not None:
                row.append(str(int(table.labels[i])))
            w.writerow(row)


def apply_missing_policy(table: RawTable, drop_threshold: float = 0.5, impute_threshold: float = 0.1) -> RawTable:
    """Drop mostly-missing features and mode-impute lightly-missing ones.

    A feature whose missing fraction lies strictly between the two thresholds
    has no defined treatment and raises :class:`IntermediateMissingness`.
    Mode ties go to the lowest category code.
    """
    if not (0.0 <= impute_threshold <= drop_threshold <= 1.0):
        raise ValueError("need 0 <= impute_threshold <= drop_threshold <= 1")
    n = table.n_rows
    keep = []
    columns = []
    for j, feat in enumerate(table.schema.features):
        col = table.codes[:, j].copy()
        miss = col == MISSING
        frac = miss.mean() if n else 0.0
        if frac > drop_threshold:
            continue
        if frac > impute_threshold:
            raise IntermediateMissingness(feat.header, float(frac))
        if miss.any():
            observed = col[~miss]
            values, counts = np.unique(observed, return_counts=True)
            # np.unique sorts ascending, so argmax picks the lowest code on ties
            col[miss] = values[np.argmax(counts)]
        keep.append(feat.header)
        columns.append(col)
    codes = np.column_stack(columns) if columns else np.empty((n, 0), dtype=np.int64)
    return RawTable(table.schema.restrict(keep), codes, table.labels)


# --------------------------------------------------------------------------
# binary design matrix
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Base:
    header: str
    code: int

    @property
    def name(self) -> str:
        return f"{self.header}_{self.code}"


@dataclass(frozen=True, eq=False)
class Interaction:
    """Product of two base columns. Equality ignores the order of the pair."""

    a: Base
    b: Base

    @property
    def name(self) -> str:
        return f"{self.a.name}_x_{self.b.name}"

    def __eq__(self, other):
        return isinstance(other, Interaction) and {self.a, self.b} == {other.a, other.b}

    def __hash__(self):
        return hash(frozenset((self.a, self.b)))


ColumnId = Base | Interaction


def parse_column(name: str) -> ColumnId:
    def base(part: str) -> Base:
        header, _, code = part.rpartition("_")
        if not header:
            raise Malformed(f"bad column name {name!r}")
        try:
            return Base(header, int(code))
        except ValueError:
            raise Malformed(f"bad column name {name!r}") from None

    if "_x_" in name:
        left, right = name.split("_x_", 1)
        return Interaction(base(left), base(right))
    return base(name)


@dataclass(frozen=True)
class BinaryMatrix:
    columns: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise SchemaError("values must be (n_rows, n_columns)")
        values.setflags(write=False)
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def take_rows(self, idx) -> "BinaryMatrix":
        return BinaryMatrix(self.columns, self.values[np.asarray(idx, dtype=np.int64)])

    def select(self, columns: Iterable) -> "BinaryMatrix":
        """Keep the given columns, in this matrix's column order."""
        wanted = set(columns)
        idx = [j for j, c in enumerate(self.columns) if c in wanted]
        if len(idx) != len(wanted):
            missing = wanted - set(self.columns)
            raise SchemaError(f"unknown columns: {sorted(c.name for c in missing)}")
        return BinaryMatrix(tuple(self.columns[j] for j in idx), self.values[:, idx])

    def has_interactions(self) -> bool:
        return any(isinstance(c, Interaction) for c in self.columns)


def one_hot_encode(table: RawTable) -> tuple[BinaryMatrix, np.ndarray | None]:
    """One column per (feature, category) pair in schema order."""
    table.validate()
    if (table.codes == MISSING).any():
        j = int(np.argwhere(table.codes == MISSING)[0, 1])
        raise UnknownCategory(table.schema.features[j].header, MISSING)
    columns = []
    blocks = []
    for j, feat in enumerate(table.schema.features):
        col = table.codes[:, j]
        for code in feat.categories:
            columns.append(Base(feat.header, code))
            blocks.append(col == code)
    values = np.column_stack(blocks).astype(np.float64) if blocks else np.empty((table.n_rows, 0))
    return BinaryMatrix(tuple(columns), values), table.labels


def interaction_correlations(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """|Pearson r| between every pairwise product column X_a*X_b and y.

    Returns a symmetric (d, d) array; constant products get 0. Works from
    Gram matrices so the O(d^2) pair scan costs a few matrix products.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    sp = X.T @ X
    spy = X.T @ (X * y[:, None])
    sq = X * X
    spp = sq.T @ sq
    sy, syy = y.sum(), (y * y).sum()
    var_p = n * spp - sp * sp
    var_y = n * syy - sy * sy
    cov = n * spy - sp * sy
    denom = np.sqrt(np.clip(var_p, 0.0, None) * max(var_y, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(denom > 0, cov / np.where(denom > 0, denom, 1.0), 0.0)
    return np.abs(r)


def select_interactions(matrix: BinaryMatrix, labels, min_abs_r: float = 0.40) -> list[Interaction]:
    if matrix.has_interactions():
        raise SchemaError("interaction gating expects a pure one-hot matrix")
    r = interaction_correlations(matrix.values, labels)
    a_idx, b_idx = np.nonzero(np.triu(r > min_abs_r, k=1))
    return [Interaction(matrix.columns[a], matrix.columns[b]) for a, b in zip(a_idx, b_idx)]


def add_interaction_columns(matrix: BinaryMatrix, interactions: Sequence[Interaction]) -> BinaryMatrix:
    if not interactions:
        return matrix
    pos = {c: j for j, c in enumerate(matrix.columns)}
    extra = np.column_stack([matrix.values[:, pos[it.a]] * matrix.values[:, pos[it.b]] for it in interactions])
    return BinaryMatrix(matrix.columns + tuple(interactions), np.hstack([matrix.values, extra]))


def generate_interactions(matrix: BinaryMatrix, labels, min_abs_r: float = 0.40) -> BinaryMatrix:
    """Append every pairwise product whose |r| with the label exceeds the gate."""
    return add_interaction_columns(matrix, select_interactions(matrix, labels, min_abs_r))


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitConfig:
    train_frac: float = 0.7
    k_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_frac < 1.0:
            raise ValueError("train_frac must lie in (0, 1)")
        if self.k_folds < 2:
            raise ValueError("k_folds must be at least 2")


def class_train_count(n: int, frac: float) -> int:
    # the epsilon absorbs binary rounding of e.g. 0.29 * 100
    return int(math.floor(frac * n + 1e-9))


def split_indices(labels, cfg: SplitConfig) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels)
    rng = np.random.default_rng(cfg.seed)
    train, test = [], []
    for c in (LS, HS):
        idx = np.flatnonzero(labels == c)
        if idx.size == 0:
            raise EmptyClass(f"class {c} has no rows")
        perm = rng.permutation(idx)
        k = class_train_count(idx.size, cfg.train_frac)
        train.append(perm[:k])
        test.append(perm[k:])
    return rng.permutation(np.concatenate(train)), rng.permutation(np.concatenate(test))


def stratified_split(matrix: BinaryMatrix, labels, cfg: SplitConfig):
    """70/30-style split with exactly floor(frac * n_c) training rows per class."""
    labels = np.asarray(labels)
    tr, te = split_indices(labels, cfg)
    return (matrix.take_rows(tr), labels[tr]), (matrix.take_rows(te), labels[te])


def fold_indices(labels, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    labels = np.asarray(labels)
    counts = [int((labels == c).sum()) for c in (LS, HS)]
    if min(counts) == 0:
        raise EmptyClass("stratified folds need both classes")
    if k > min(counts):
        raise KTooLarge(f"k={k} exceeds the minority class count {min(counts)}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(labels.size, dtype=np.int64)
    for c in (LS, HS):
        perm = rng.permutation(np.flatnonzero(labels == c))
        fold_of[perm] = np.arange(perm.size) % k
    all_idx = np.arange(labels.size)
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def stratified_kfold(matrix: BinaryMatrix, labels, cfg: SplitConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    labels = np.asarray(labels)
    if matrix.shape[0] != labels.size:
        raise SchemaError("matrix and labels disagree on row count")
    return fold_indices(labels, cfg.k_folds, cfg.seed)


# --------------------------------------------------------------------------
# matrix CSV
# --------------------------------------------------------------------------


def write_matrix_csv(matrix: BinaryMatrix, labels, path, extra: dict | None = None) -> None:
    """Columns are named ``HEADER_CODE`` / ``A_x_B``; SEV last, then extras."""
    extra = extra or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = matrix.names + ([LABEL_HEADER] if labels is not None else []) + list(extra)
        w.writerow(header)
        for i in range(matrix.shape[0]):
            row = [_fmt(v) for v in matrix.values[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            row.extend(str(col[i]) for col in extra.values())
            w.writerow(row)


def _fmt(v: float) -> str:
    if v == 0.0:
        return "0"
    if v == 1.0:
        return "1"
    return repr(float(v))


def read_matrix_csv(path, ignore: Sequence[str] = ("origin",)) -> tuple[BinaryMatrix, np.ndarray | None]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise Malformed(f"{path} is empty") from None
        rows = [r for r in reader if r]
    keep = [i for i, h in enumerate(header) if h != LABEL_HEADER and h not in ignore]
    columns = tuple(parse_column(header[i]) for i in keep)
    try:
        values = np.array([[float(r[i]) for i in keep] for r in rows], dtype=np.float64).reshape(len(rows), len(keep))
        labels = None
        if LABEL_HEADER in header:
            p = header.index(LABEL_HEADER)
            labels = np.array([int(r[p]) for r in rows], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise Malformed(f"{path}: {exc}") from exc
    return BinaryMatrix(columns, values), labels


__all__ = [
    "MISSING",
    "LABEL_HEADER",
    "Feature",
    "FeatureSchema",
    "RawTable",
    "Base",
    "Interaction",
    "BinaryMatrix",
    "SplitConfig",
    "read_raw_csv",
    "write_raw_csv",
    "apply_missing_policy",
    "one_hot_encode",
    "generate_interactions",
    "select_interactions",
    "add_interaction_columns",
    "stratified_split",
    "stratified_kfold",
    "split_indices",
    "fold_indices",
    "read_matrix_csv",
    "write_matrix_csv",
    "parse_column",
]
