"""Deterministic seed derivation for ensemble runs.

Every random quantity in the package flows from a single 64-bit master
seed.  Sub-streams (one per graph, per pair stream, per Monte Carlo
estimate) are derived by hashing ``(master_seed, *path)`` through
``numpy.random.SeedSequence``, whose mixing function is part of numpy's
stability contract.  Results are therefore independent of execution
order and worker count.
"""
from __future__ import annotations

import numpy as np

__all__ = ["derive_seed", "derive_rng"]


def derive_seed(master_seed: int, *path: int) -> int:
    """Stable 64-bit sub-seed for the stream identified by ``path``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """PCG64 generator seeded from ``derive_seed(master_seed, *path)``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))
