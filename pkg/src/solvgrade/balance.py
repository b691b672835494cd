"""Bias-to-uniform resampling with replacement.

Class draw weights blend the original class frequencies with the uniform
distribution: weight_c = (1 - bias) * freq_c + bias / k. Each output
instance is drawn in two stages — class by weight, then uniformly within the
class — so the expected counts land between the original skew (bias 0) and
perfectly balanced (bias 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .dataset import DataError, Dataset


@dataclass(frozen=True)
class ResampleSpec:
    """Seed, uniformity bias in [0, 1], and output size (None: input size)."""

    seed: int
    bias: float = 1.0
    output_size: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.bias <= 1.0 or not math.isfinite(self.bias):
            raise ValueError("bias must lie in [0, 1]")
        if self.output_size is not None and self.output_size < 1:
            raise ValueError("output_size must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def class_weights(dataset: Dataset, bias: float) -> np.ndarray:
    """Per-class draw weights; positive weight on an empty class is an error."""
    counts = dataset.class_counts()
    k = dataset.ordering.size
    freq = counts / dataset.n
    weights = (1.0 - bias) * freq + bias / k
    for c in np.flatnonzero((weights > 0.0) & (counts == 0)):
        raise DataError(
            f"cannot resample: class {dataset.ordering.labels[c]!r} has positive "
            "draw weight but no instances"
        )
    return weights / weights.sum()


def resample(dataset: Dataset, spec: ResampleSpec) -> Dataset:
    """Draw a new dataset with replacement; deterministic for a given seed.

    Stream use is pinned: one ``choice`` call draws the class of every output
    instance, then one elementwise ``integers`` call picks within-class
    offsets.
    """
    if dataset.n == 0:
        raise ValueError("cannot resample an empty dataset")
    out_n = spec.output_size if spec.output_size is not None else dataset.n
    weights = class_weights(dataset, spec.bias)
    members = [np.flatnonzero(dataset.y == c) for c in range(dataset.ordering.size)]
    sizes = np.array([m.shape[0] for m in members])
    gen = rngmod.make_rng(spec.seed, rngmod.RESAMPLE)
    classes = gen.choice(dataset.ordering.size, size=out_n, p=weights)
    offsets = gen.integers(0, sizes[classes])
    picks = np.array([members[c][o] for c, o in zip(classes, offsets)], dtype=np.int64)
    return dataset.subset(picks)
