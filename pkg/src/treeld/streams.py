"""
Counter-based random streams.

Every stream is a Philox generator seeded from ``SeedSequence(seed, spawn_key=key)``. A key such
as ``(n, chunk_index, purpose)`` names an independent stream, so the draws of a chunk do not depend
on which worker evaluates it or in which order chunks are scheduled.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator, None]

# purpose tags of the per-chunk streams
SAMPLE_STREAM = 0
CHANNEL_STREAM = 1
TIE_STREAM = 2


def chunk_generator(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    if any(int(k) < 0 for k in key):
        raise ValueError(f"stream key entries must be non-negative, got {key!r}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Pass generators through; wrap integer seeds (or ``None``) in a Philox stream."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.Generator(np.random.Philox())
    return chunk_generator(int(seed))


def purpose_generator(seed: SeedLike, purpose: int) -> np.random.Generator:
    """Generator for one purpose tag; integer seeds give distinct streams per purpose."""
    if isinstance(seed, np.random.Generator) or seed is None:
        return as_generator(seed)
    return chunk_generator(int(seed), purpose)
