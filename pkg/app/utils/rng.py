"""
Deterministic Random Streams

All randomness is drawn from generators derived from (master seed, stream, index...)
so that results never depend on execution order or worker count.
"""
import numpy as np

# Stream keys
TOPOLOGY = 1
CHANNEL_FRAME = 2
ALLOCATION_BLOCK = 3
ALLOCATION_OFFSET = 4
JITTER = 5
TRIAL = 6
RANDOM_BASELINE = 7
SYMBOLS = 8
ORACLE = 9


def derive_seed_sequence(seed, *keys):
    """Build the SeedSequence for a named sub-stream of `seed`"""
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))


def derive_rng(seed, *keys):
    """Generator for the sub-stream (seed, *keys)"""
    return np.random.default_rng(derive_seed_sequence(seed, *keys))


def derive_seed(seed, *keys):
    """Integer seed for the sub-stream (seed, *keys), usable as a new master seed"""
    return int(derive_seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])
