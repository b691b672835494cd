"""Evaluation harness: pipelines, protocols, metrics, and report rendering.

A pipeline bundles feature selection, resampling, and the classifier. The
protocols — stratified cross-validation, stratified percentage split, and
holdout — fit the pipeline on training data only, unless the legacy
resample-before-split variant is explicitly requested, and pool per-instance
predictions into one report.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .balance import ResampleSpec, resample
from .dataset import ClassOrdering, DataError, Dataset
from .featsel import greedy_stepwise
from .ordinal import OrdinalModel, TreeModel, train as train_ordinal
from .tree import TreeParams, build

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Pipeline:
    """What to fit: selection on/off, optional resampling, tree knobs, ordinal."""

    select: bool = True
    bins: int = 10
    resample: ResampleSpec | None = None
    tree: TreeParams = TreeParams()
    ordinal: bool = True


@dataclass(frozen=True)
class FittedPipeline:
    """A trained model plus the attribute projection it was fitted on."""

    selected: tuple[int, ...] | None
    model: OrdinalModel | TreeModel

    def predict(self, instance) -> tuple[int, np.ndarray]:
        vec = np.asarray(instance, dtype=np.float64)
        if self.selected is not None:
            vec = vec[np.array(self.selected, dtype=np.int64)]
        return self.model.predict(vec)


@dataclass(frozen=True)
class PredictionRecord:
    """One evaluated instance: actual and predicted index, per-class scores."""

    actual: int
    predicted: int
    scores: tuple[float, ...]


def fit_pipeline(train: Dataset, pipeline: Pipeline, fold: int | None = None) -> FittedPipeline:
    """Fit on training data only: select, then resample, then train.

    ``fold`` derives a distinct resampling seed per cross-validation fold;
    single-fit protocols use the resampling spec's own seed directly.
    """
    work = train
    selected: tuple[int, ...] | None = None
    if pipeline.select:
        selected = tuple(greedy_stepwise(work, pipeline.bins))
        work = work.project(selected)
    if pipeline.resample is not None:
        spec = pipeline.resample
        if fold is not None:
            spec = replace(spec, seed=rngmod.derive_seed(spec.seed, rngmod.FIT, fold))
        work = resample(work, spec)
    if pipeline.ordinal:
        model: OrdinalModel | TreeModel = train_ordinal(work, pipeline.tree)
    else:
        model = TreeModel(work.ordering, work.schema, pipeline.tree, build(work, pipeline.tree))
    return FittedPipeline(selected, model)


def stratified_folds(dataset: Dataset, k: int, seed: int) -> list[np.ndarray]:
    """Disjoint index folds; per-class and overall sizes differ by at most 1.

    Each class is shuffled and dealt round-robin, carrying the dealing cursor
    across classes so overall fold sizes stay balanced too.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > dataset.n:
        raise ValueError(f"cannot make {k} folds from {dataset.n} instances")
    gen = rngmod.make_rng(seed, rngmod.FOLDS)
    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    for c in range(dataset.ordering.size):
        idx = np.flatnonzero(dataset.y == c)
        if idx.size == 0:
            continue
        gen.shuffle(idx)
        for j, t in enumerate(idx):
            folds[(cursor + j) % k].append(int(t))
        cursor = (cursor + idx.size) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _predict_fold(fitted: FittedPipeline, dataset: Dataset, indices: np.ndarray) -> list[PredictionRecord]:
    records = []
    for t in indices:
        predicted, scores = fitted.predict(dataset.x[t])
        records.append(
            PredictionRecord(int(dataset.y[t]), predicted, tuple(float(s) for s in scores))
        )
    return records


def cross_validate(
    dataset: Dataset,
    k: int,
    pipeline: Pipeline,
    seed: int,
    resample_before_split: bool = False,
) -> "EvaluationReport":
    """Stratified k-fold CV; pools every fold's predictions into one report.

    With ``resample_before_split`` the whole dataset is resampled once up
    front and in-fold resampling is disabled — the optimistic legacy protocol
    where test instances can share originals with the training folds.
    """
    data = dataset
    if resample_before_split and pipeline.resample is not None:
        data = resample(data, pipeline.resample)
        pipeline = replace(pipeline, resample=None)
    folds = stratified_folds(data, k, seed)
    everything = np.arange(data.n)
    records: list[PredictionRecord] = []
    for i, fold in enumerate(folds):
        fitted = fit_pipeline(data.subset(np.setdiff1d(everything, fold)), pipeline, fold=i)
        records.extend(_predict_fold(fitted, data, fold))
    protocol = {
        "protocol": "cv",
        "folds": k,
        "seed": seed,
        "resample_before_split": resample_before_split,
    }
    return build_report(records, data.ordering, protocol)


def split_allocation(counts: np.ndarray, train_fraction: float, train_total: int) -> np.ndarray:
    """Per-class training counts by largest-remainder apportionment."""
    quotas = train_fraction * counts
    base = np.floor(quotas + 1e-9).astype(np.int64)
    seats = train_total - int(base.sum())
    order = np.argsort(-(quotas - base), kind="stable")  # ties: lower class first
    alloc = base.copy()
    for c in order[:seats]:
        alloc[c] += 1
    return alloc


def percentage_split(
    dataset: Dataset,
    train_fraction: float,
    pipeline: Pipeline,
    seed: int,
) -> "EvaluationReport":
    """Stratified one-shot split with floor(fraction * n) training instances."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = dataset.n
    train_total = int(math.floor(train_fraction * n + 1e-9))
    if train_total == 0 or train_total == n:
        raise ValueError("split leaves one side empty")
    alloc = split_allocation(dataset.class_counts(), train_fraction, train_total)
    gen = rngmod.make_rng(seed, rngmod.SPLIT)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for c in range(dataset.ordering.size):
        idx = np.flatnonzero(dataset.y == c)
        gen.shuffle(idx)
        take = int(alloc[c])
        train_idx.extend(int(i) for i in idx[:take])
        test_idx.extend(int(i) for i in idx[take:])
    fitted = fit_pipeline(dataset.subset(np.array(sorted(train_idx))), pipeline)
    records = _predict_fold(fitted, dataset, np.array(sorted(test_idx)))
    protocol = {"protocol": "split", "train_fraction": train_fraction, "seed": seed}
    return build_report(records, dataset.ordering, protocol)


def holdout(train: Dataset, test: Dataset, pipeline: Pipeline) -> "EvaluationReport":
    """Fit on one dataset, evaluate on another with the same shape."""
    if train.schema != test.schema or train.ordering != test.ordering:
        raise DataError("train and test sets must share schema and class ordering")
    fitted = fit_pipeline(train, pipeline)
    records = _predict_fold(fitted, test, np.arange(test.n))
    return build_report(records, test.ordering, {"protocol": "holdout"})


def _score_matrix(records: Sequence[PredictionRecord], n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    scores = np.array([r.scores for r in records], dtype=np.float64)
    if scores.shape[1] != n_classes:
        raise ValueError("score vectors do not match the class count")
    onehot = np.zeros_like(scores)
    onehot[np.arange(len(records)), [r.actual for r in records]] = 1.0
    return scores, onehot


def mae(records: Sequence[PredictionRecord], n_classes: int) -> float:
    """Mean absolute error over all n*k per-class probability indicators."""
    if not records:
        raise ValueError("need at least one prediction")
    scores, onehot = _score_matrix(records, n_classes)
    return float(np.abs(scores - onehot).sum() / scores.size)


def rmse(records: Sequence[PredictionRecord], n_classes: int) -> float:
    """Root mean squared error over the same n*k terms as ``mae``."""
    if not records:
        raise ValueError("need at least one prediction")
    scores, onehot = _score_matrix(records, n_classes)
    return float(math.sqrt(((scores - onehot) ** 2).sum() / scores.size))


def ordinal_mae(records: Sequence[PredictionRecord]) -> float:
    """Mean absolute distance between predicted and actual class indices."""
    if not records:
        raise ValueError("need at least one prediction")
    return float(np.mean([abs(r.predicted - r.actual) for r in records]))


@dataclass(frozen=True)
class EvaluationReport:
    """Pooled confusion matrix (rows = actual), recalls, accuracy, and errors."""

    labels: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]
    per_class_recall: tuple[float | None, ...]
    accuracy: float
    mae: float
    rmse: float
    mae_ordinal: float
    n: int
    protocol: dict

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "n": self.n,
            "confusion": [list(row) for row in self.confusion],
            "per_class_recall": list(self.per_class_recall),
            "accuracy": self.accuracy,
            "mae": self.mae,
            "rmse": self.rmse,
            "mae_ordinal": self.mae_ordinal,
            "protocol": dict(self.protocol),
        }

    @staticmethod
    def from_dict(doc: dict) -> "EvaluationReport":
        return EvaluationReport(
            labels=tuple(doc["labels"]),
            confusion=tuple(tuple(int(v) for v in row) for row in doc["confusion"]),
            per_class_recall=tuple(
                None if v is None else float(v) for v in doc["per_class_recall"]
            ),
            accuracy=float(doc["accuracy"]),
            mae=float(doc["mae"]),
            rmse=float(doc["rmse"]),
            mae_ordinal=float(doc["mae_ordinal"]),
            n=int(doc["n"]),
            protocol=dict(doc["protocol"]),
        )


def build_report(
    records: Sequence[PredictionRecord],
    ordering: ClassOrdering,
    protocol: dict,
) -> EvaluationReport:
    if not records:
        raise ValueError("cannot report on zero predictions")
    k = ordering.size
    confusion = np.zeros((k, k), dtype=np.int64)
    for r in records:
        confusion[r.actual, r.predicted] += 1
    row_totals = confusion.sum(axis=1)
    recalls = tuple(
        float(confusion[c, c] / row_totals[c]) if row_totals[c] > 0 else None
        for c in range(k)
    )
    return EvaluationReport(
        labels=ordering.labels,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        per_class_recall=recalls,
        accuracy=float(np.trace(confusion) / len(records)),
        mae=mae(records, k),
        rmse=rmse(records, k),
        mae_ordinal=ordinal_mae(records),
        n=len(records),
        protocol=dict(protocol),
    )


def _abbreviations(labels: Sequence[str]) -> list[str]:
    short = [s[:1].upper() for s in labels]
    return short if len(set(short)) == len(short) else list(labels)


def _protocol_line(protocol: dict) -> str:
    kind = protocol.get("protocol")
    if kind == "cv":
        line = f"{protocol['folds']}-fold cross-validation (seed {protocol['seed']})"
        if protocol.get("resample_before_split"):
            line += ", resampled before folding"
        return line
    if kind == "split":
        return (
            f"stratified split, train fraction {protocol['train_fraction']:g} "
            f"(seed {protocol['seed']})"
        )
    if kind == "holdout":
        return "holdout test set"
    return str(kind)


def render_report(report: EvaluationReport, fmt: str = "text", config: dict | None = None) -> str:
    """Render a report; JSON keeps every field, text mirrors the matrix layout."""
    if fmt == "json":
        doc = {"format_version": REPORT_FORMAT_VERSION, **report.to_dict()}
        if config is not None:
            doc["config"] = config
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    k = len(report.labels)
    abbr = _abbreviations(report.labels)
    rows = []
    for c in range(k):
        total = sum(report.confusion[c])
        recall = report.per_class_recall[c]
        rows.append(
            [abbr[c]]
            + [str(v) for v in report.confusion[c]]
            + [str(total), "n/a" if recall is None else f"{100.0 * recall:.1f}"]
        )
    rows.append([""] * (k + 1) + [str(report.n), f"{100.0 * report.accuracy:.1f}"])
    header = ["Class"] + abbr + ["Total", "Classified Correctly (%)"]
    widths = [max(len(header[j]), *(len(r[j]) for r in rows)) for j in range(len(header))]
    lines = [f"Protocol: {_protocol_line(report.protocol)}", ""]
    lines.append("  ".join(h.ljust(widths[j]) if j == 0 else h.rjust(widths[j]) for j, h in enumerate(header)))
    for i, r in enumerate(rows):
        if i == k:
            lines.append("-" * len(lines[2]))
        lines.append("  ".join(v.ljust(widths[j]) if j == 0 else v.rjust(widths[j]) for j, v in enumerate(r)))
    if abbr != list(report.labels):
        lines.append("")
        lines.append(", ".join(f"{a} = {l}" for a, l in zip(abbr, report.labels)))
    lines.append("")
    lines.append(f"MAE          {report.mae:.4f}")
    lines.append(f"RMSE         {report.rmse:.4f}")
    lines.append(f"Ordinal MAE  {report.mae_ordinal:.4f}")
    return "\n".join(lines) + "\n"
