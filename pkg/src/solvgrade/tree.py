"""C4.5-style binary decision trees over numeric attributes.

Candidate thresholds are midpoints between consecutive distinct sorted
values; instances with value <= threshold go left. Per attribute the
threshold maximizing information gain is kept, and across attributes the
split with the best gain ratio wins, restricted to attributes whose gain
reaches the mean positive gain. Pessimistic post-pruning replaces a subtree
with a leaf whenever the pooled upper-confidence error estimate is no worse
than the sum over its children.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Union

import numpy as np

from .dataset import AttributeSchema, Dataset


@dataclass(frozen=True)
class TreeParams:
    """Induction controls: leaf size floor, pruning switch and confidence."""

    min_leaf: int = 2
    prune: bool = True
    confidence: float = 0.25

    def __post_init__(self) -> None:
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be at least 1")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie strictly between 0 and 1")


@dataclass
class Leaf:
    """Terminal node holding the training class counts."""

    counts: np.ndarray


@dataclass
class Split:
    """Internal node: attribute index, threshold, children, training counts."""

    attribute: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    counts: np.ndarray


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class SplitCandidate:
    threshold: float
    info_gain: float
    gain_ratio: float


def entropy(counts) -> float:
    """Shannon entropy in bits of a non-negative count vector (some count > 0)."""
    c = np.asarray(counts, dtype=np.float64)
    if c.size == 0 or (c < 0).any():
        raise ValueError("counts must be non-negative and non-empty")
    total = float(c.sum())
    if total <= 0.0:
        raise ValueError("entropy needs at least one positive count")
    p = c[c > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _row_entropies(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Entropy of each row of a (rows, classes) count matrix."""
    p = counts / totals[:, None]
    terms = np.zeros_like(p)
    mask = counts > 0
    terms[mask] = p[mask] * np.log2(p[mask])
    return -terms.sum(axis=1)


def _best_split(values: np.ndarray, labels: np.ndarray, n_classes: int, min_size: int) -> SplitCandidate | None:
    n = values.shape[0]
    if n < 2:
        return None
    order = np.argsort(values, kind="stable")
    v = values[order]
    lab = labels[order]
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), lab] = 1.0
    cum = onehot.cumsum(axis=0)
    # Boundary p: first index of the right block; only between distinct values.
    pos = np.flatnonzero(v[1:] > v[:-1]) + 1
    pos = pos[(pos >= min_size) & (n - pos >= min_size)]
    if pos.size == 0:
        return None
    total = cum[-1]
    left = cum[pos - 1]
    right = total[None, :] - left
    nl = pos.astype(np.float64)
    nr = float(n) - nl
    gains = entropy(total) - (nl / n) * _row_entropies(left, nl) - (nr / n) * _row_entropies(right, nr)
    best = int(np.argmax(gains))  # first max: lowest threshold wins ties
    gain = float(gains[best])
    if gain <= 0.0:
        return None
    p = int(pos[best])
    threshold = float((v[p - 1] + v[p]) / 2.0)
    split_info = entropy(np.array([nl[best], nr[best]]))
    return SplitCandidate(threshold, gain, gain / split_info)


def best_numeric_split(dataset: Dataset, attribute: int, min_size: int = 1) -> SplitCandidate | None:
    """Best midpoint threshold for one attribute, or None without positive gain.

    With ``min_size`` > 1, only thresholds leaving at least that many
    instances on each side are considered.
    """
    if min_size < 1:
        raise ValueError("min_size must be at least 1")
    return _best_split(dataset.x[:, attribute], dataset.y, dataset.ordering.size, min_size)


_MEAN_GAIN_SLACK = 1e-12  # FP guard: a lone best gain must not miss its own mean


def _grow(x: np.ndarray, y: np.ndarray, k: int, params: TreeParams) -> TreeNode:
    counts = np.bincount(y, minlength=k).astype(np.float64)
    if int((counts > 0).sum()) <= 1 or y.shape[0] < 2 * params.min_leaf:
        return Leaf(counts)
    candidates = []
    for a in range(x.shape[1]):
        cand = _best_split(x[:, a], y, k, params.min_leaf)
        if cand is not None:
            candidates.append((a, cand))
    if not candidates:
        return Leaf(counts)
    mean_gain = sum(c.info_gain for _, c in candidates) / len(candidates)
    chosen_a, chosen = None, None
    for a, cand in candidates:  # ascending attribute index: first max wins ties
        if cand.info_gain < mean_gain - _MEAN_GAIN_SLACK:
            continue
        if chosen is None or cand.gain_ratio > chosen.gain_ratio:
            chosen_a, chosen = a, cand
    if chosen is None:  # unreachable unless FP noise starves the guard
        chosen_a, chosen = max(candidates, key=lambda ac: ac[1].info_gain)
    mask = x[:, chosen_a] <= chosen.threshold
    left = _grow(x[mask], y[mask], k, params)
    right = _grow(x[~mask], y[~mask], k, params)
    return Split(chosen_a, chosen.threshold, left, right, counts)


def build(dataset: Dataset, params: TreeParams = TreeParams()) -> TreeNode:
    """Induce a tree (and prune it, when enabled) from a labeled dataset."""
    if dataset.n == 0:
        raise ValueError("cannot build a tree from an empty dataset")
    node = _grow(dataset.x, dataset.y, dataset.ordering.size, params)
    if params.prune:
        node = prune_pessimistic(node, params.confidence)
    return node


def _error_upper_bound(total: float, errors: float, z: float) -> float:
    """One-sided normal-approximation upper bound on the binomial error rate."""
    f = errors / total
    z2 = z * z
    radicand = f / total - (f * f) / total + z2 / (4.0 * total * total)
    upper = (f + z2 / (2.0 * total) + z * math.sqrt(radicand)) / (1.0 + z2 / total)
    return min(1.0, upper)


def _estimated_errors(counts: np.ndarray, z: float) -> float:
    total = float(counts.sum())
    errors = total - float(counts.max())
    return total * _error_upper_bound(total, errors, z)


def prune_pessimistic(node: TreeNode, confidence: float = 0.25) -> TreeNode:
    """Bottom-up subtree replacement; equal estimates prefer the smaller tree."""
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly between 0 and 1")
    z = NormalDist().inv_cdf(1.0 - confidence)

    def walk(nd: TreeNode) -> tuple[TreeNode, float]:
        if isinstance(nd, Leaf):
            return nd, _estimated_errors(nd.counts, z)
        left, err_left = walk(nd.left)
        right, err_right = walk(nd.right)
        pooled = _estimated_errors(nd.counts, z)
        if pooled <= err_left + err_right:
            return Leaf(nd.counts.copy()), pooled
        return Split(nd.attribute, nd.threshold, left, right, nd.counts), err_left + err_right

    pruned, _ = walk(node)
    return pruned


def predict_distribution(tree: TreeNode, instance, laplace: bool = False) -> np.ndarray:
    """Class probabilities at the leaf an instance routes to (<= goes left)."""
    x = np.asarray(instance, dtype=np.float64)
    node = tree
    while isinstance(node, Split):
        node = node.left if x[node.attribute] <= node.threshold else node.right
    counts = node.counts + 1.0 if laplace else node.counts
    return counts / counts.sum()


def node_count(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return 1 + node_count(node.left) + node_count(node.right)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_to_doc(node: TreeNode, schema: AttributeSchema) -> dict:
    """Self-describing JSON document; floats round-trip exactly via repr."""
    if isinstance(node, Leaf):
        return {"kind": "leaf", "counts": [float(c) for c in node.counts]}
    return {
        "kind": "split",
        "attribute": schema.names[node.attribute],
        "threshold": float(node.threshold),
        "counts": [float(c) for c in node.counts],
        "left": tree_to_doc(node.left, schema),
        "right": tree_to_doc(node.right, schema),
    }


def tree_from_doc(doc: dict, schema: AttributeSchema) -> TreeNode:
    kind = doc.get("kind")
    if kind == "leaf":
        return Leaf(np.array(doc["counts"], dtype=np.float64))
    if kind == "split":
        return Split(
            schema.index(doc["attribute"]),
            float(doc["threshold"]),
            tree_from_doc(doc["left"], schema),
            tree_from_doc(doc["right"], schema),
            np.array(doc["counts"], dtype=np.float64),
        )
    raise ValueError(f"unknown tree node kind {kind!r}")
