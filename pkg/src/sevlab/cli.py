"""Command-line front end: ``sevlab <command> [flags]``.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import secrets
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import balance as bal
from . import experiment as exp
from . import featsel
from .errors import ColumnMismatch, Malformed, SevlabError
from .metrics import REPORT_FIELDS, evaluate
from .models import SLOTS, TrainConfig, load_model, save_model, train
from .synthgen import SAMPLING_METHODS, SyntheticConfig, load_marginal_spec, sample_dataset
from .tabular import (
    LABEL_HEADER,
    BinaryMatrix,
    SplitConfig,
    add_interaction_columns,
    parse_column,
    read_matrix_csv,
    read_raw_csv,
    select_interactions,
    split_indices,
    write_matrix_csv,
    write_raw_csv,
)

log = logging.getLogger("sevlab")
EXTRA_COLUMNS = ("split", "origin", "weight")
RANK_TECHNIQUES = featsel.METHODS + ("merged",)


def _setup_logging():
    level = os.environ.get("SEVLAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        log.warning("no --seed given; using random seed %d", args.seed)
    return args.seed


# --------------------------------------------------------------------------
# matrix files with bookkeeping columns
# --------------------------------------------------------------------------


def _is_raw_header(header) -> bool:
    try:
        for h in header:
            if h not in (LABEL_HEADER,) + EXTRA_COLUMNS:
                parse_column(h)
    except Malformed:
        return True
    return False


def _read_header(path):
    with open(path, newline="") as fh:
        try:
            return [h.strip() for h in next(csv.reader(fh))]
        except StopIteration:
            raise Malformed(f"{path} is empty") from None


def read_bundle(path, spec_path=None):
    """Matrix, labels and bookkeeping columns from a matrix or raw-table CSV."""
    header = _read_header(path)
    if _is_raw_header(header):
        table = read_raw_csv(path, load_marginal_spec(spec_path).schema)
        matrix, labels = exp.encode_table(table)
        return matrix, labels, {}
    matrix, labels = read_matrix_csv(path, ignore=EXTRA_COLUMNS)
    extras = {}
    present = [h for h in EXTRA_COLUMNS if h in header]
    if present:
        pos = [header.index(h) for h in present]
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r][1:]
        for h, p in zip(present, pos):
            extras[h] = [r[p] for r in rows]
    return matrix, labels, extras


def _rows_where(extras, key, value, n):
    if key not in extras:
        return np.arange(n)
    return np.flatnonzero(np.array(extras[key]) == value)


def _need_labels(labels, path):
    if labels is None:
        raise Malformed(f"{path} has no {LABEL_HEADER} column")
    return labels


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_synth(args):
    seed = _seed(args)
    spec = load_marginal_spec(args.spec)
    synth = SyntheticConfig(n_ls=args.n_ls, n_hs=args.n_hs, seed=seed, method=args.sampling)
    table, _ = sample_dataset(spec, synth)
    write_raw_csv(table, args.out)
    log.info("wrote %d rows to %s", table.n_rows, args.out)


def cmd_prepare(args):
    seed = _seed(args)
    table = read_raw_csv(args.inp, load_marginal_spec(args.spec).schema)
    matrix, y = exp.encode_table(table)
    y = _need_labels(y, args.inp)
    tr, te = split_indices(y, SplitConfig(train_frac=args.train_frac, seed=seed))
    fit = np.arange(y.size) if args.mimic_paper_leakage else tr
    matrix = add_interaction_columns(matrix, select_interactions(matrix.take_rows(fit), y[fit]))
    split = np.empty(y.size, dtype=object)
    split[tr], split[te] = "train", "test"
    order = np.concatenate([tr, te])
    write_matrix_csv(matrix.take_rows(order), y[order], args.out, {"split": list(split[order])})


def cmd_select(args):
    seed = _seed(args)
    matrix, y, extras = read_bundle(args.inp, args.spec)
    y = _need_labels(y, args.inp)
    rows = np.arange(y.size) if args.mimic_paper_leakage else _rows_where(extras, "split", "train", y.size)
    fit_X, fit_y = matrix.take_rows(rows), y[rows]
    methods = featsel.METHODS if args.technique == "merged" else (args.technique,)
    rankings = {m: featsel.rank(m, fit_X, fit_y, seed=seed, rfe_step=args.rfe_step) for m in methods}
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["column", "method", "score", "rank"])
        if args.technique == "merged":
            merged = featsel.merge_union({m: featsel.top_k(r, args.k) for m, r in rankings.items()})
            chosen = [c for c in matrix.columns if c in merged.selected]
            for i, c in enumerate(chosen):
                w.writerow([c.name, ";".join(merged.provenance[c]), len(merged.provenance[c]), i + 1])
        else:
            r = rankings[args.technique]
            for pos, j in enumerate(r.order):
                w.writerow([r.columns[j].name, r.method, repr(float(r.scores[j])), pos + 1])
            chosen = [c for c in matrix.columns if c in featsel.top_k(r, args.k)]
    if args.matrix_out:
        out = matrix.select(chosen)
        write_matrix_csv(out, y, args.matrix_out, {k: v for k, v in extras.items()})


def _balance_params(args, seed):
    hs = args.hs_weight if args.hs_weight == "auto" else float(args.hs_weight)
    return bal.BalanceParams(args.technique, k_neighbors=args.k_neighbors, target_ratio=args.ratio,
                             bandwidth=args.bandwidth, n_clusters=args.n_clusters, hs_weight=hs,
                             binarize=args.binarize, seed=seed)


def cmd_balance(args):
    seed = _seed(args)
    params = _balance_params(args, seed)
    matrix, y, extras = read_bundle(args.inp, args.spec)
    y = _need_labels(y, args.inp)
    tr = _rows_where(extras, "split", "train", y.size)
    te = np.setdiff1d(np.arange(y.size), tr)
    res = bal.apply_balance(matrix.values[tr], y[tr], params)
    weights = res.weights if res.weights is not None else np.ones(res.y.size)
    values = np.vstack([res.X, matrix.values[te]])
    labels = np.concatenate([res.y, y[te]])
    out_extra = {}
    if "split" in extras:
        out_extra["split"] = ["train"] * res.y.size + ["test"] * te.size
    out_extra["origin"] = res.origin_names + ["original"] * te.size
    if params.technique == "class_weight":
        out_extra["weight"] = [repr(float(v)) for v in np.concatenate([weights, np.ones(te.size)])]
    write_matrix_csv(BinaryMatrix(matrix.columns, values), labels, args.out, out_extra)
    n0, n1 = res.counts()
    log.info("balanced training rows: %d LS, %d HS", n0, n1)


def cmd_train(args):
    seed = _seed(args)
    matrix, y, extras = read_bundle(args.inp, args.spec)
    y = _need_labels(y, args.inp)
    rows = _rows_where(extras, "split", "train", y.size)
    w = np.array([float(v) for v in extras["weight"]])[rows] if "weight" in extras else None
    spec = SLOTS[args.model]
    overrides = exp.preset_overrides(spec, args.preset)
    model = train(spec, matrix.values[rows], y[rows], TrainConfig(seed=seed, sample_weights=w, overrides=overrides),
                  columns=matrix.names)
    save_model(model, args.out)


def cmd_evaluate(args):
    _seed(args)
    model = load_model(args.model)
    matrix, y, extras = read_bundle(args.inp, args.spec)
    y = _need_labels(y, args.inp)
    rows = _rows_where(extras, "split", "test", y.size)
    if model.columns is not None:
        missing = [c for c in model.columns if c not in set(matrix.names)]
        if missing:
            raise ColumnMismatch(f"input lacks model columns: {', '.join(missing[:5])}")
        pos = {n: j for j, n in enumerate(matrix.names)}
        X = matrix.values[:, [pos[c] for c in model.columns]]
    else:
        X = matrix.values
    report = evaluate(y[rows], model.predict_proba(X[rows]))
    if args.format == "json":
        text = json.dumps(report.as_dict(), indent=1, sort_keys=True) + "\n"
    else:
        text = "metric,value\n" + "".join(
            f"{f},{'' if getattr(report, f) is None else repr(float(getattr(report, f)))}\n" for f in REPORT_FIELDS)
    _write_or_print(text, args.out)


def _load_cfg(args):
    doc_seed = None
    if args.config:
        cfg = exp.load_config(args.config)
        doc_seed = cfg.seed if cfg.seed_given else None
    else:
        cfg = exp.ExperimentConfig()
    if args.seed is None and doc_seed is not None:
        args.seed = doc_seed
    cfg = exp.with_seed(cfg, _seed(args))
    opts = cfg.options
    if args.preset:
        opts = replace(opts, preset=args.preset)
    if args.mimic_paper_leakage:
        opts = replace(opts, mimic_paper_leakage=True)
    if getattr(args, "cv_before_balance", False):
        opts = replace(opts, cv_before_balance=True)
    return replace(cfg, options=opts)


def cmd_matrix(args):
    cfg = _load_cfg(args)
    table = exp.run_from_config(cfg, workers=args.workers)
    exp.emit_results(table, args.format, args.out)
    counts = table.status_counts()
    log.info("%d cells: %d ok, %d skipped", len(table.cells), counts["ok"], counts["skipped"])


def cmd_overlap(args):
    cfg = _load_cfg(args)
    matrix, y = exp.load_dataset(cfg)
    result = exp.overlap_experiment(matrix, y, seed=cfg.seed, split=cfg.split, options=cfg.options)
    text = exp.render_overlap(result)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)


def cmd_report(args):
    _seed(args)
    table = exp.load_results(args.inp)
    _write_or_print(exp.render_results(table, args.format), args.out)


def _write_or_print(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sevlab", description=__doc__, allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--seed", type=int, default=None, help="random seed (logged when omitted)")
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "sample a synthetic raw table from the marginal spec")
    p.add_argument("--spec", default=None, help="marginal spec JSON (default: shipped)")
    p.add_argument("--n-ls", type=int, default=4217)
    p.add_argument("--n-hs", type=int, default=1134)
    p.add_argument("--sampling", choices=SAMPLING_METHODS, default="quota",
                   help="quota: category counts fixed to n*p (default); iid: independent draws")
    p.add_argument("--out", required=True)

    p = add("prepare", cmd_prepare, "encode, split 70/30 and append gated interactions")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--mimic-paper-leakage", action="store_true")
    p.add_argument("--out", required=True)

    p = add("select", cmd_select, "rank columns with one technique or the merged top-k union")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--technique", choices=RANK_TECHNIQUES, required=True)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--rfe-step", type=int, default=1)
    p.add_argument("--mimic-paper-leakage", action="store_true")
    p.add_argument("--matrix-out", default=None, help="also write the input restricted to the top-k columns")
    p.add_argument("--out", required=True)

    p = add("balance", cmd_balance, "balance the training rows of a matrix")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--technique", choices=bal.TECHNIQUES, required=True)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--k-neighbors", type=int, default=None)
    p.add_argument("--bandwidth", type=float, default=0.05)
    p.add_argument("--n-clusters", type=int, default=8)
    p.add_argument("--hs-weight", default="4.0")
    p.add_argument("--binarize", action="store_true")
    p.add_argument("--out", required=True)

    p = add("train", cmd_train, "train one model slot on the training rows")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--model", choices=list(SLOTS), required=True)
    p.add_argument("--preset", choices=("default", "fast"), default="default")
    p.add_argument("--out", required=True)

    p = add("evaluate", cmd_evaluate, "score a saved model on the test rows")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--model", required=True, help="model JSON written by train")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)

    for name, func, help_ in (("matrix", cmd_matrix, "run the dataset x model matrix"),
                              ("overlap", cmd_overlap, "balanced-pool versus standard NearMiss-1 pipeline")):
        p = add(name, func, help_)
        p.add_argument("--config", default=None, help="experiment config JSON")
        p.add_argument("--preset", choices=("default", "fast"), default=None)
        p.add_argument("--mimic-paper-leakage", action="store_true")
        if name == "matrix":
            p.add_argument("--cv-before-balance", action="store_true")
            p.add_argument("--workers", type=int, default=1)
            p.add_argument("--format", choices=("csv", "markdown", "json"), default="csv")
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--out", default=None)

    p = add("report", cmd_report, "render a JSON results table as csv, markdown or json")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--format", choices=("csv", "markdown", "json"), default="markdown")
    p.add_argument("--out", default=None)
    return parser


def run_cli(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "workers", 1) < 1:
        sys.stderr.write("sevlab: error: --workers must be positive\n")
        return 2
    try:
        args.func(args)
    except (SevlabError, ValueError, OSError) as exc:
        sys.stderr.write(f"sevlab: error: {exc}\n")
        return 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
