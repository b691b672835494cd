"""Deterministic random-stream construction shared by every sampling component.

All randomness in the package flows through ``make_rng``. Streams are Philox
counter-based generators keyed by a ``SeedSequence`` built from the user seed
plus integer stream tags, so each component owns an independent, reproducible
stream without coordinating with the others.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 2009

# Stream tags. Appending distinct tags to the same user seed yields
# statistically independent Philox streams.
SYNTH = 1
RESAMPLE = 2
FOLDS = 3
SPLIT = 4
FIT = 5


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return the Philox generator keyed by ``seed`` and a stream tag path."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *stream])))


def derive_seed(seed: int, *stream: int) -> int:
    """Collapse a stream path into a plain integer seed for a nested component."""
    return int(np.random.SeedSequence([seed, *stream]).generate_state(1, np.uint64)[0])
