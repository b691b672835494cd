"""Shared test fixtures and independent oracle implementations.

The oracles here are deliberately naive — scalar loops, per-candidate
recounting — so they share no code path with the package internals they
check.
"""
from __future__ import annotations

import math

import numpy as np

from solvgrade.dataset import AttributeSchema, ClassOrdering, Dataset


def naive_entropy(counts) -> float:
    total = sum(counts)
    return -sum((c / total) * math.log2(c / total) for c in counts if c)


def naive_best_split(values, labels, n_classes, min_size=1):
    """Exhaustive midpoint enumeration; first strict maximum wins ties."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    v = [float(values[i]) for i in order]
    lab = [int(labels[i]) for i in order]
    parent_counts = [lab.count(c) for c in range(n_classes)]
    parent = naive_entropy(parent_counts)
    best = None
    for p in range(1, n):
        if not (v[p] > v[p - 1]):
            continue
        if p < min_size or n - p < min_size:
            continue
        left = [lab[:p].count(c) for c in range(n_classes)]
        right = [lab[p:].count(c) for c in range(n_classes)]
        gain = parent - (p / n) * naive_entropy(left) - ((n - p) / n) * naive_entropy(right)
        if best is None or gain > best[1]:
            best = ((v[p - 1] + v[p]) / 2.0, gain, p)
    if best is None or best[1] <= 0.0:
        return None
    threshold, gain, p = best
    return threshold, gain, gain / naive_entropy([p, n - p])


def naive_combine(bp, top_score_complement=False):
    """Per-class scores straight from the decomposition formulas."""
    k = len(bp) + 1
    scores = [0.0] * k
    scores[0] = 1.0 - bp[0]
    for i in range(1, k - 1):
        scores[i] = max(bp[i - 1] - bp[i], 0.0)
    scores[k - 1] = (1.0 - bp[k - 2]) if top_score_complement else bp[k - 2]
    return scores


def make_dataset(x, y, n_classes=None, labels=None) -> Dataset:
    """Dataset from plain arrays with generated attribute/class names."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=np.int64)
    k = n_classes if n_classes is not None else int(y.max()) + 1
    k = max(k, 2)
    names = labels if labels is not None else tuple(f"C{i}" for i in range(k))
    schema = AttributeSchema(tuple(f"a{j}" for j in range(x.shape[1])))
    return Dataset(schema, ClassOrdering(tuple(names)), x, y)


def random_dataset(rng: np.random.Generator, n, m, k) -> Dataset:
    """Continuous attributes, labels uniform over k classes (all present)."""
    x = rng.uniform(-5.0, 5.0, size=(n, m))
    y = rng.integers(0, k, size=n)
    y[:k] = np.arange(k)  # keep every class populated
    return make_dataset(x, y, n_classes=k)


def cluster_dataset(per_class=20, k=4, m=1) -> Dataset:
    """Perfectly separable: class c sits in a tight cluster around 10*c."""
    xs, ys = [], []
    for c in range(k):
        offsets = np.linspace(-1.0, 1.0, per_class)
        block = np.tile((10.0 * c + offsets)[:, None], (1, m))
        xs.append(block)
        ys.append(np.full(per_class, c))
    return make_dataset(np.vstack(xs), np.concatenate(ys), n_classes=k)
