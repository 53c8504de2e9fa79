"""
Counter-based random streams.

Every stream is a Philox generator keyed by a SeedSequence built from the
master seed and a spawn key such as (replicate, stream). Streams are
derived statelessly, so any worker can rebuild any replicate's stream
without coordination.
"""

import numpy as np

from src.utils.errors import ConfigError

MAX_SEED = 2**64 - 1

# stream ids inside one replicate
STREAM_DATA = 0
STREAM_AUX = 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed {seed} outside 0..2^64-1")
    return seed


def philox_generator(master_seed: int, *spawn_key: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=check_seed(master_seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


def replicate_generator(master_seed: int, replicate: int, stream: int = STREAM_DATA) -> np.random.Generator:
    return philox_generator(master_seed, replicate, stream)
