"""Seedable PRNG with a pinned algorithm, so randomized artifacts reproduce
across implementations and platforms.

The generator is splitmix64 (Steele/Lea/Flood). Output k of seed s is

    state_k = (s + k * 0x9E3779B97F4A7C15) mod 2^64      (k = 1, 2, ...)
    z = state_k
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2^64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB  mod 2^64
    output_k = z ^ (z >> 31)

Floats in [0, 1) take the top 53 bits: (output >> 11) * 2^-53. Bounded
integers use rejection sampling on the raw 64-bit stream, and shuffles are
Fisher-Yates from the last index down. Because the state is a pure counter,
bulk draws can be vectorized exactly (see ``uniform_array``).
"""

from __future__ import annotations

from typing import Sequence, TypeVar

import numpy as np

_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_MASK = 0xFFFFFFFFFFFFFFFF

T = TypeVar("T")


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based splitmix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"randrange bound must be positive, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        u = self.next_u64()
        while u >= limit:
            u = self.next_u64()
        return u % n

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform_array(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Vectorized draw of ``prod(shape)`` floats, bit-identical to
        calling ``next_float`` that many times."""
        n = int(np.prod(shape)) if shape else 1
        ks = np.arange(1, n + 1, dtype=np.uint64)
        states = np.uint64(self._state) + ks * np.uint64(_GAMMA)
        z = (states ^ (states >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GAMMA) & _MASK
        floats = (z >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return (low + floats * (high - low)).reshape(shape)
