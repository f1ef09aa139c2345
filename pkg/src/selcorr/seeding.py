"""Deterministic child-seed derivation for replicated simulations.

Every generator in this package is a pure function of (config, seed). Studies
with many replications derive one child seed per unit of work from a master
seed and the unit's index via ``numpy.random.SeedSequence`` spawn keys. The
derivation is a pure function of (master_seed, indices), so results never
depend on execution order or worker count.
"""

from __future__ import annotations

import numpy as np

SeedLike = int | np.random.SeedSequence


def child_seed(master_seed: int, *indices: int) -> np.random.SeedSequence:
    """Seed for the work unit addressed by ``indices`` (e.g. grid point, replication)."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(indices))


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def rng_from(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(seed))
