"""Correlation-based feature selection.

Attributes are discretized into equal-frequency bins (cut points only
between distinct values), correlations are symmetric uncertainties, and a
greedy forward search maximizes the subset merit
k * mean(attr-class SU) / sqrt(k + k(k-1) * mean(pairwise SU)), stopping at
the first step with no strict improvement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .tree import entropy


@dataclass(frozen=True)
class DiscretizedView:
    """Per-attribute cut points plus the resulting integer bin codes."""

    cuts: tuple[np.ndarray, ...]
    codes: np.ndarray


def _cut_points(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal-frequency cut points, snapped to midpoints between distinct values."""
    ordered = np.sort(values)
    n = ordered.shape[0]
    boundaries = np.flatnonzero(ordered[1:] > ordered[:-1]) + 1
    if boundaries.size == 0:
        return np.empty(0, dtype=np.float64)
    used: set[int] = set()
    cuts = []
    for b in range(1, bins):
        target = b * n / bins
        # nearest distinct-value boundary; ties toward the lower position
        gap = np.abs(boundaries - target)
        p = int(boundaries[int(np.argmin(gap))])
        if p not in used:
            used.add(p)
            cuts.append((ordered[p - 1] + ordered[p]) / 2.0)
    return np.array(sorted(cuts), dtype=np.float64)


def discretize(dataset: Dataset, bins: int = 10) -> DiscretizedView:
    """Bin every attribute; a value's code is the number of cuts below it."""
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if dataset.n == 0:
        raise ValueError("cannot discretize an empty dataset")
    cuts = []
    codes = np.empty((dataset.n, dataset.schema.size), dtype=np.int64)
    for a in range(dataset.schema.size):
        c = _cut_points(dataset.x[:, a], bins)
        cuts.append(c)
        codes[:, a] = np.searchsorted(c, dataset.x[:, a], side="left")
    return DiscretizedView(tuple(cuts), codes)


def symmetric_uncertainty(a, b) -> float:
    """2*I(A;B) / (H(A)+H(B)) over two discrete columns; 0 when both are constant."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("expected two equal-length non-empty 1-D arrays")
    _, ca = np.unique(a, return_inverse=True)
    _, cb = np.unique(b, return_inverse=True)
    nb = int(cb.max()) + 1
    ha = entropy(np.bincount(ca))
    hb = entropy(np.bincount(cb))
    if ha + hb == 0.0:
        return 0.0
    hab = entropy(np.bincount(ca * nb + cb))
    mi = max(ha + hb - hab, 0.0)
    return min(1.0, 2.0 * mi / (ha + hb))


def subset_merit(k: int, mean_class_corr: float, mean_pair_corr: float) -> float:
    """CFS merit of a k-attribute subset from its two mean correlations."""
    if k < 1:
        raise ValueError("merit is defined for non-empty subsets")
    return (k * mean_class_corr) / math.sqrt(k + k * (k - 1) * mean_pair_corr)


def cfs_merit(subset, view: DiscretizedView, labels: np.ndarray) -> float:
    """Merit of a concrete attribute subset against the class labels."""
    subset = [int(a) for a in subset]
    if not subset:
        raise ValueError("merit is defined for non-empty subsets")
    class_corr = [symmetric_uncertainty(view.codes[:, a], labels) for a in subset]
    pair_corr = [
        symmetric_uncertainty(view.codes[:, a], view.codes[:, b])
        for i, a in enumerate(subset)
        for b in subset[i + 1 :]
    ]
    mean_pair = sum(pair_corr) / len(pair_corr) if pair_corr else 0.0
    return subset_merit(len(subset), sum(class_corr) / len(class_corr), mean_pair)


def greedy_stepwise(dataset: Dataset, bins: int = 10) -> list[int]:
    """Forward selection on training data; attributes in the order added.

    Grows the subset by the attribute giving the largest strict merit
    increase (ties to the lowest index) and stops at the first step where no
    attribute improves the merit, so the merit sequence is strictly
    increasing. All-noise data yields at most one attribute.
    """
    view = discretize(dataset, bins)
    labels = dataset.y
    m = dataset.schema.size
    class_corr = np.array(
        [symmetric_uncertainty(view.codes[:, a], labels) for a in range(m)]
    )
    pair_cache: dict[tuple[int, int], float] = {}

    def pair(a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        if key not in pair_cache:
            pair_cache[key] = symmetric_uncertainty(view.codes[:, key[0]], view.codes[:, key[1]])
        return pair_cache[key]

    selected: list[int] = []
    sum_class = 0.0
    sum_pairs = 0.0
    merit = 0.0
    while len(selected) < m:
        best_a = -1
        best_merit = merit
        best_pair_add = 0.0
        for a in range(m):
            if a in selected:
                continue
            k = len(selected) + 1
            pair_add = sum(pair(a, b) for b in selected)
            total_pairs = sum_pairs + pair_add
            mean_pair = total_pairs / (k * (k - 1) / 2) if k > 1 else 0.0
            candidate = subset_merit(k, (sum_class + class_corr[a]) / k, mean_pair)
            if candidate > best_merit:
                best_a, best_merit, best_pair_add = a, candidate, pair_add
        if best_a < 0:
            break
        selected.append(best_a)
        sum_class += class_corr[best_a]
        sum_pairs += best_pair_add
        merit = best_merit
    return selected
