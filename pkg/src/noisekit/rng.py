"""Seeding helpers.

All randomness in the package flows through numpy's PCG64 generator seeded
from a `SeedSequence` built out of (seed, *path) integer tuples, so every
derived stream is reproducible and independent of execution order.
"""
from __future__ import annotations

import numpy as np


def generator(seed: int, *path: int) -> np.random.Generator:
    """Return a fresh generator for the stream identified by (seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), *map(int, path))))


def child_seed(seed: int, *path: int) -> int:
    """Derive a deterministic integer sub-seed from (seed, *path)."""
    return int(np.random.SeedSequence((int(seed), *map(int, path))).generate_state(1)[0])
