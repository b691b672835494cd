"""Ordinal classification via cumulative binary decomposition.

Following Frank & Hall (2001), a k-class ordered problem becomes k-1 binary
problems "is the class above grade i?". Per-class scores are differences of
consecutive cumulative probabilities clamped at zero; the top class scores
its own cumulative probability directly (the additive-complement variant is
available behind a flag). The argmax wins, ties going to the lower grade.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import AttributeSchema, ClassOrdering, Dataset
from .tree import TreeNode, TreeParams, build, predict_distribution, tree_from_doc, tree_to_doc

MODEL_FORMAT_VERSION = 1


class ModelError(RuntimeError):
    """A persisted model cannot be read or does not fit the given data."""


def derive_binary_dataset(dataset: Dataset, i: int) -> Dataset:
    """Binary view of an ordered dataset: 0 = grade <= i, 1 = grade > i."""
    k = dataset.ordering.size
    if not 0 <= i <= k - 2:
        raise ValueError(f"cut index must lie in [0, {k - 2}]")
    pivot = dataset.ordering.labels[i]
    ordering = ClassOrdering((f"<={pivot}", f">{pivot}"))
    return Dataset(dataset.schema, ordering, dataset.x, (dataset.y > i).astype(np.int64))


@dataclass(frozen=True)
class OrdinalModel:
    """k-1 cumulative binary trees over a shared attribute schema."""

    ordering: ClassOrdering
    schema: AttributeSchema
    params: TreeParams
    trees: tuple[TreeNode, ...]

    def binary_probabilities(self, instance) -> np.ndarray:
        """Pr(grade > ordering[i]) for each cut i, in order."""
        return np.array([predict_distribution(t, instance)[1] for t in self.trees])

    def predict(self, instance) -> tuple[int, np.ndarray]:
        return classify(self, instance)


@dataclass(frozen=True)
class TreeModel:
    """Plain multiclass tree baseline with the same prediction surface."""

    ordering: ClassOrdering
    schema: AttributeSchema
    params: TreeParams
    tree: TreeNode

    def predict(self, instance) -> tuple[int, np.ndarray]:
        scores = predict_distribution(self.tree, instance)
        return int(np.argmax(scores)), scores


def train(dataset: Dataset, params: TreeParams = TreeParams()) -> OrdinalModel:
    """Fit one tree per cumulative cut of the class ordering."""
    if dataset.n == 0:
        raise ValueError("cannot train on an empty dataset")
    trees = tuple(
        build(derive_binary_dataset(dataset, i), params)
        for i in range(dataset.ordering.size - 1)
    )
    return OrdinalModel(dataset.ordering, dataset.schema, params, trees)


def combine_probabilities(
    binary_probs,
    top_score_complement: bool = False,
    normalize: bool = False,
) -> np.ndarray:
    """Per-class scores from the k-1 cumulative probabilities.

    score[0] = 1 - bp[0]; score[i] = max(bp[i-1] - bp[i], 0) for the middle
    classes; score[k-1] = bp[k-2], or 1 - bp[k-2] with top_score_complement.
    Scores are not normalized unless asked.
    """
    bp = np.asarray(binary_probs, dtype=np.float64)
    if bp.ndim != 1 or bp.size < 1:
        raise ValueError("expected a non-empty 1-D vector of binary probabilities")
    if not np.all(np.isfinite(bp)) or np.any(bp < 0.0) or np.any(bp > 1.0):
        raise ValueError("binary probabilities must lie in [0, 1]")
    k = bp.size + 1
    scores = np.empty(k, dtype=np.float64)
    scores[0] = 1.0 - bp[0]
    if k > 2:
        scores[1:-1] = np.maximum(bp[:-1] - bp[1:], 0.0)
    scores[-1] = 1.0 - bp[-1] if top_score_complement else bp[-1]
    if normalize:
        total = float(scores.sum())
        if total > 0.0:
            scores = scores / total
    return scores


def classify(
    model: OrdinalModel,
    instance,
    top_score_complement: bool = False,
    normalize: bool = False,
) -> tuple[int, np.ndarray]:
    """Predicted class index and per-class scores; ties pick the lower grade."""
    bp = model.binary_probabilities(instance)
    scores = combine_probabilities(bp, top_score_complement, normalize)
    return int(np.argmax(scores)), scores


def _params_to_doc(params: TreeParams) -> dict:
    return {"min_leaf": params.min_leaf, "prune": params.prune, "confidence": params.confidence}


def _params_from_doc(doc: dict) -> TreeParams:
    return TreeParams(int(doc["min_leaf"]), bool(doc["prune"]), float(doc["confidence"]))


def model_to_doc(model: OrdinalModel | TreeModel) -> dict:
    trees = model.trees if isinstance(model, OrdinalModel) else (model.tree,)
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "ordinal" if isinstance(model, OrdinalModel) else "multiclass",
        "ordering": list(model.ordering.labels),
        "attributes": list(model.schema.names),
        "params": _params_to_doc(model.params),
        "trees": [tree_to_doc(t, model.schema) for t in trees],
    }


def model_from_doc(doc: dict) -> OrdinalModel | TreeModel:
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    ordering = ClassOrdering(tuple(doc["ordering"]))
    schema = AttributeSchema(tuple(doc["attributes"]))
    params = _params_from_doc(doc["params"])
    trees = [tree_from_doc(t, schema) for t in doc["trees"]]
    kind = doc.get("kind")
    if kind == "ordinal":
        if len(trees) != ordering.size - 1:
            raise ModelError("ordinal model must carry one tree per class cut")
        return OrdinalModel(ordering, schema, params, tuple(trees))
    if kind == "multiclass":
        if len(trees) != 1:
            raise ModelError("multiclass model must carry exactly one tree")
        return TreeModel(ordering, schema, params, trees[0])
    raise ModelError(f"unknown model kind {kind!r}")


def save_model(model: OrdinalModel | TreeModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_doc(model), indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> OrdinalModel | TreeModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ModelError("model file must hold a JSON object")
    return model_from_doc(doc)
