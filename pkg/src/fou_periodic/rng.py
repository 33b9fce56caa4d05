"""
Seeded random streams.

Streams are Philox (counter-based) generators keyed by a base seed and a
tuple of integers (purpose tag, replication index, ...). A stream never
depends on how many draws other streams made, so replications can run in
any order on any number of workers.
"""

import numpy as np

# Purpose tags; part of the stream key, never reorder.
PATH = 0
LIMIT_NORMAL = 1
LIMIT_ZINF = 2
ZINF = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, *key)."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit integer seed derived from (seed, *key), for provenance records."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])
