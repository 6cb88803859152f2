"""Deterministic random-stream derivation.

All randomness in the library flows from a single master seed.  Each
consumer (path index, experiment stage, ...) derives an independent
Generator from ``(master_seed, *key)`` via numpy's SeedSequence, so
ensembles can run in parallel without coordinating RNG state and every
result is reproducible from the config alone.
"""

from __future__ import annotations

import numpy as np


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return an independent Generator for the given master seed and key path."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)
