"""
Seed fan-out for reproducible sub-computations.

A single master seed is split with numpy's SeedSequence: every
sub-computation is addressed by a tuple of non-negative integer keys
(spawn key), so adding a new consumer never shifts the streams of the
existing ones.

Key layout used by the experiment catalogue:
    (0, i)  initial state of the i-th variational run
    (1, i)  random model instances (couplings) of the i-th draw
    (2, i)  random tensors used by checks and bounds suites
"""

from typing import Optional

import numpy as np


def derive_rng(master: Optional[int], *keys: int) -> np.random.Generator:
    """
    Build the generator of one sub-computation.

    Args:
        master: Master seed (None draws fresh OS entropy)
        *keys: Spawn key addressing the sub-computation

    Returns:
        Independent numpy Generator
    """
    sequence = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(sequence)


def as_rng(seed: "int | np.random.Generator | None") -> np.random.Generator:
    """Accept a seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master: Optional[int], *keys: int) -> int:
    """Integer seed of one sub-computation, for APIs that take plain seeds."""
    return int(derive_rng(master, *keys).integers(0, 2**31 - 1))
