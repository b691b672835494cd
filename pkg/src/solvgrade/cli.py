"""Command line interface.

Subcommands: label, select, train, evaluate, classify, synth. Exit codes:
0 success, 1 runtime or model error, 2 input or usage error. Identical flags
produce byte-identical outputs; nothing here writes timestamps or entropy
unless --seed random is requested explicitly.
"""
from __future__ import annotations

import argparse
import io
import json
import re
import secrets
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .balance import ResampleSpec, resample
from .dataset import (
    CANONICAL_ORDERING,
    LABEL_MODES,
    CsvTable,
    DataError,
    SynthSpec,
    TABLE2_COUNTS,
    action_level,
    format_value,
    label_from_car,
    load_csv,
    parse_records,
    read_table,
    record_car,
    synth_table,
    write_table,
)
from .evaluate import Pipeline, cross_validate, fit_pipeline, holdout, percentage_split, render_report
from .featsel import greedy_stepwise
from .ordinal import ModelError, OrdinalModel, load_model, save_model
from .tree import TreeParams, node_count, tree_depth


class CliUsageError(Exception):
    """Bad flags or arguments; maps to exit code 2."""


def _parse_seed(text: str) -> int:
    if text == "random":
        return secrets.randbits(63)
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}")
    if seed < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return seed


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=_parse_seed,
        default=rngmod.DEFAULT_SEED,
        metavar="N",
        help=f"master seed for all randomness, or 'random' (default {rngmod.DEFAULT_SEED})",
    )
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    common.add_argument("--quiet", action="store_true", help="suppress summaries and notices")
    common.add_argument("-o", "--output", metavar="PATH", help="write output here instead of stdout")
    return common


def _pipeline_options() -> argparse.ArgumentParser:
    pipe = argparse.ArgumentParser(add_help=False)
    pipe.add_argument("--label-mode", choices=LABEL_MODES, default="class", help="how to label rows")
    pipe.add_argument("--no-select", action="store_true", help="skip feature selection")
    pipe.add_argument("--bins", type=int, default=10, help="discretization bins for selection")
    pipe.add_argument("--no-resample", action="store_true", help="train on the raw class skew")
    pipe.add_argument("--bias", type=float, default=1.0, help="resampling bias to uniform in [0, 1]")
    pipe.add_argument("--resample-size", type=int, metavar="N", help="resampled size (default: input size)")
    pipe.add_argument("--min-leaf", type=int, default=2, help="minimum instances per leaf")
    pipe.add_argument("--confidence", type=float, default=0.25, help="pruning confidence")
    pipe.add_argument("--unpruned", action="store_true", help="skip pessimistic pruning")
    pipe.add_argument("--no-ordinal", action="store_true", help="plain multiclass tree baseline")
    return pipe


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solvgrade",
        description="Grade non-life insurers into ordered solvency classes and evaluate the grader.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    pipe = _pipeline_options()

    p = sub.add_parser("label", parents=[common], help="add class and action_level columns")
    p.add_argument("input", help="CSV file to label")
    p.add_argument("--mode", choices=LABEL_MODES, default="car", help="labeling source (default car)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("select", parents=[common], help="pick attributes by correlation merit")
    p.add_argument("input", help="labeled CSV file")
    p.add_argument("--label-mode", choices=LABEL_MODES, default="class")
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", parents=[common, pipe], help="fit and save a grading model")
    p.add_argument("input", help="labeled CSV file")
    p.add_argument("--model", default="model.json", metavar="PATH", help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common, pipe], help="run an evaluation protocol")
    p.add_argument("input", help="labeled CSV file")
    p.add_argument("--protocol", default="cv10", metavar="P", help="cvK, splitP, or holdout:PATH")
    p.add_argument(
        "--paper-protocol",
        "--resample-before-split",
        dest="resample_before_split",
        action="store_true",
        help="resample the whole set once before splitting (optimistic legacy protocol)",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", parents=[common], help="grade new companies with a saved model")
    p.add_argument("model", help="model file from 'train'")
    p.add_argument("input", help="CSV file with the model's attribute columns")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic labeled dataset")
    p.add_argument("--counts", metavar="I,W,M,S", help="instances per class, lowest grade first")
    p.add_argument("--table2", action="store_true", help=f"preset counts {TABLE2_COUNTS}")
    p.add_argument("--noise", type=float, default=0.1, help="ratio noise level (default 0.1)")
    p.set_defaults(func=cmd_synth)

    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_table(table: CsvTable, path: str | None) -> None:
    out = io.StringIO()
    write_table(table, out)
    _emit(out.getvalue(), path)


def _build_pipeline(args: argparse.Namespace) -> Pipeline:
    try:
        spec = None
        if not args.no_resample:
            spec = ResampleSpec(seed=args.seed, bias=args.bias, output_size=args.resample_size)
        params = TreeParams(args.min_leaf, not args.unpruned, args.confidence)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from None
    if args.bins < 2:
        raise CliUsageError("bins must be at least 2")
    return Pipeline(
        select=not args.no_select,
        bins=args.bins,
        resample=spec,
        tree=params,
        ordinal=not args.no_ordinal,
    )


def _pipeline_config(args: argparse.Namespace) -> dict:
    return {
        "label_mode": args.label_mode,
        "select": not args.no_select,
        "bins": args.bins,
        "resample": not args.no_resample,
        "bias": args.bias,
        "resample_size": args.resample_size,
        "min_leaf": args.min_leaf,
        "prune": not args.unpruned,
        "confidence": args.confidence,
        "ordinal": not args.no_ordinal,
    }


def cmd_label(args: argparse.Namespace) -> int:
    table = read_table(args.input)
    _, records = parse_records(table)
    keep = [i for i, name in enumerate(table.header) if name not in ("class", "action_level")]
    header = [table.header[i] for i in keep] + ["class", "action_level"]
    rows = []
    for row_no, (row, rec) in enumerate(zip(table.rows, records), start=1):
        if args.mode == "class":
            if rec.label is None:
                raise DataError(f"row {row_no}, column 'class': label required")
            label = CANONICAL_ORDERING.labels[CANONICAL_ORDERING.index(rec.label)]
        else:
            label = label_from_car(record_car(rec, args.mode, row_no)).label
        rows.append([row[i] for i in keep] + [label, action_level(label)])
    _emit_table(CsvTable(header, rows), args.output)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    dataset = load_csv(args.input, args.label_mode)
    if args.bins < 2:
        raise CliUsageError("bins must be at least 2")
    picked = greedy_stepwise(dataset, args.bins)
    names = [dataset.schema.names[a] for a in picked]
    _emit(json.dumps(names) + "\n", args.output)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    dataset = load_csv(args.input, args.label_mode)
    pipeline = _build_pipeline(args)
    fitted = fit_pipeline(dataset, pipeline)
    save_model(fitted.model, args.model)
    if args.quiet:
        return 0
    selected = (
        None
        if fitted.selected is None
        else [dataset.schema.names[a] for a in fitted.selected]
    )
    trees = fitted.model.trees if isinstance(fitted.model, OrdinalModel) else (fitted.model.tree,)
    config = {"command": "train", "input": args.input, "model": args.model, "seed": args.seed}
    config.update(_pipeline_config(args))
    summary = {
        "config": config,
        "class_counts": {
            label: int(c)
            for label, c in zip(dataset.ordering.labels, dataset.class_counts())
        },
        "selected_attributes": selected,
        "trees": [{"nodes": node_count(t), "depth": tree_depth(t)} for t in trees],
        "model": args.model,
    }
    if args.format == "json":
        _emit(json.dumps(summary, indent=2) + "\n", args.output)
    else:
        lines = [f"trained {len(trees)} tree(s) on {dataset.n} instances -> {args.model}"]
        if selected is not None:
            lines.append(f"selected attributes: {', '.join(selected) if selected else '(none)'}")
        lines.append(
            "tree sizes: "
            + ", ".join(f"{t['nodes']} nodes / depth {t['depth']}" for t in summary["trees"])
        )
        _emit("\n".join(lines) + "\n", args.output)
    return 0


_PROTOCOL_RE = re.compile(r"^(?:cv(?P<folds>\d+)|split(?P<test>\d+)|holdout:(?P<path>.+))$")


def cmd_evaluate(args: argparse.Namespace) -> int:
    match = _PROTOCOL_RE.match(args.protocol)
    if match is None:
        raise CliUsageError(
            f"unknown protocol {args.protocol!r}; expected cvK, splitP, or holdout:PATH"
        )
    dataset = load_csv(args.input, args.label_mode)
    pipeline = _build_pipeline(args)
    config = {
        "command": "evaluate",
        "input": args.input,
        "protocol": args.protocol,
        "resample_before_split": args.resample_before_split,
        "seed": args.seed,
    }
    config.update(_pipeline_config(args))

    if match["folds"] is not None:
        k = int(match["folds"])
        if k < 2:
            raise CliUsageError("cross-validation needs at least 2 folds")
        report = cross_validate(
            dataset, k, pipeline, args.seed, resample_before_split=args.resample_before_split
        )
    else:
        # One-shot protocols resample up front under the legacy flag.
        if args.resample_before_split and pipeline.resample is not None:
            dataset = resample(dataset, pipeline.resample)
            pipeline = replace(pipeline, resample=None)
        if match["test"] is not None:
            test_pct = int(match["test"])
            if not 0 < test_pct < 100:
                raise CliUsageError("split percentage must lie strictly between 0 and 100")
            report = percentage_split(dataset, 1.0 - test_pct / 100.0, pipeline, args.seed)
        else:
            test = load_csv(match["path"], args.label_mode)
            report = holdout(dataset, test, pipeline)
    _emit(render_report(report, args.format, config=config), args.output)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    table = read_table(args.input)
    schema, records = parse_records(table)
    try:
        columns = [schema.index(name) for name in model.schema.names]
    except KeyError as exc:
        raise ModelError(f"input is missing a model attribute: {exc.args[0]}") from None
    header = list(table.header) + ["predicted_class"]
    header += [f"score_{label.lower()}" for label in model.ordering.labels]
    header += ["action_level"]
    rows = []
    for row, rec in zip(table.rows, records):
        vec = np.array([rec.ratios[c] for c in columns], dtype=np.float64)
        predicted, scores = model.predict(vec)
        label = model.ordering.labels[predicted]
        rows.append(
            list(row) + [label] + [format_value(s) for s in scores] + [action_level(label)]
        )
    _emit_table(CsvTable(header, rows), args.output)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.table2 == (args.counts is not None):
        raise CliUsageError("choose exactly one of --table2 or --counts I,W,M,S")
    if args.table2:
        counts = TABLE2_COUNTS
    else:
        try:
            parts = tuple(int(p) for p in args.counts.split(","))
        except ValueError:
            raise CliUsageError(f"cannot parse --counts {args.counts!r}") from None
        counts = parts
    try:
        spec = SynthSpec(counts=counts, seed=args.seed, noise=args.noise)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from None
    _emit_table(synth_table(spec), args.output)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except (DataError, CliUsageError) as exc:
        print(f"solvgrade: error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, ValueError, RuntimeError, OSError) as exc:
        print(f"solvgrade: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
