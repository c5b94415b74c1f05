from enum import IntEnum

import numpy as np

__all__ = ['Stream', 'make_rng', 'derive_seed', 'as_generator']


class Stream(IntEnum):
    """Purpose tags mixed into the spawn key of every generator."""
    DESIGN = 1
    RESPONSE = 2
    PRIOR = 3
    CHAIN = 4
    THETA = 5
    REPETITION = 6
    PILOT = 7
    EXACT = 8


def make_rng(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    """Build an independent counter-based generator.

    The same (seed, stream, keys) always yields the same stream, and
    distinct keys give statistically independent streams, so work split
    across processes draws identical numbers in any order.

    Args:
        seed (int): master seed
        stream (Stream): purpose of the stream
        *keys (int): further indices, e.g. a row or repetition number

    Returns:
        np.random.Generator: Philox-backed generator
    """
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), *map(int, keys)))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, stream: Stream, *keys: int) -> int:
    """Derive a child integer seed, e.g. one per repetition."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), *map(int, keys)))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def as_generator(seed, stream: Stream, *keys: int) -> np.random.Generator:
    """Pass a Generator through unchanged, or build one from an integer seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed, stream, *keys)
