"""
Seeded, splittable random streams.

Every stochastic operation takes an explicit integer seed. Independent streams
are derived from (seed, *keys) through numpy's SeedSequence spawn keys, so a
stream never depends on how many numbers another stream consumed.
"""

from typing import List

import numpy as np

from src.core.exceptions import InputDataError


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 generator for the stream identified by seed and optional integer keys"""
    if seed < 0:
        raise InputDataError(f"seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(sequence))


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Derive `count` independent integer seeds (e.g. one per phantom slice)"""
    sequence = np.random.SeedSequence(int(seed))
    return [int(child.generate_state(1)[0]) for child in sequence.spawn(count)]
