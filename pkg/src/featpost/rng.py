"""Deterministic pseudo-random streams used for synthesis and shuffling.

The generator is splitmix-style: the i-th raw word is a pure bit-mix of
``seed + i * GOLDEN`` (64-bit wrap-around), so the same seed reproduces the
same stream everywhere, independent of numpy's own RNG machinery, and blocks
of the stream can be produced vectorized.

Gaussian deviates come from Box-Muller over consecutive stream words: pair
``(u1, u2)`` with ``u1`` mapped into (0, 1] and ``u2`` into [0, 1) yields
``r*cos(theta)`` then ``r*sin(theta)``. Consumers draw them in row-major,
dimension-major-within-row order, which is what fixes a dataset bit-for-bit.
"""

from __future__ import annotations

import math

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential view of the stream; used where draws are data-dependent."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def next_unit(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound); modulo reduction, bias is negligible here."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


def raw_block(seed: int, count: int) -> np.ndarray:
    """First ``count`` raw 64-bit words of the stream, vectorized."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def gaussian_block(seed: int, count: int) -> np.ndarray:
    """First ``count`` standard normals of the stream (Box-Muller, fixed order)."""
    if count <= 0:
        return np.empty(0)
    n_pairs = (count + 1) // 2
    words = raw_block(seed, 2 * n_pairs)
    u = (words >> np.uint64(11)).astype(np.float64)
    u1 = (u[0::2] + 1.0) * 2.0**-53  # (0, 1]: keeps log() finite
    u2 = u[1::2] * 2.0**-53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * math.pi) * u2
    out = np.empty(2 * n_pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]
