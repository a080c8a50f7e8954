"""Deterministic random-stream derivation.

Streams are derived from a base seed plus an integer address path, backed by
the counter-based Philox generator.  Two addresses never share state, so a
batch of Monte Carlo tasks can be split across workers (or run serially) and
produce identical results: task i always draws from ``stream(seed, i)``
regardless of scheduling.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for the address ``(seed, *path)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
