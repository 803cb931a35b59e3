"""Deterministic splitmix64 stream.

Used wherever the artifact promises bit-identical randomness across runs and
platforms (dense-matrix off-diagonals, sampled basis measurements).  The
stream for a seed is fixed by the splitmix64 mixing function alone, so it does
not depend on any library's generator internals.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the splitmix64 stream for `seed`, as uint64."""
    i = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + i * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """`count` doubles in [0, 1), from the top 53 bits of the splitmix64 stream."""
    return (splitmix64(seed, count) >> np.uint64(11)).astype(np.float64) * 2.0**-53
