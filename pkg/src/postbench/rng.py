"""Seeded, portable random number generation.

Every stochastic piece of the benchmark (reservoir weights, train/test
splits, start vectors) draws from this generator so that a run is
bit-reproducible from its seed alone, independent of platform or numpy
version.  The generator is xoshiro256++ with its state expanded from the
seed by splitmix64, both implemented directly on 64-bit integer
arithmetic.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31), state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def derive_seed(base: int, *tags: str) -> int:
    """Derive a child seed from a base seed and string tags.

    Used to hand independent streams to parallelizable jobs (one per
    model/target/seed cell) without correlating them.
    """
    s = base & _MASK
    for tag in tags:
        for b in tag.encode("utf-8"):
            s = (s ^ b) & _MASK
            _, s = _splitmix64(s)
    out, _ = _splitmix64(s)
    return out


class Rng:
    """xoshiro256++ stream seeded via splitmix64.

    Single-owner: never share an instance across threads; use
    :meth:`spawn` to derive independent children instead.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        s = self.seed
        state = []
        for _ in range(4):
            v, s = _splitmix64(s)
            state.append(v)
        self._s = state

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[0] + s[3]) & _MASK, 23) + s[0]) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform draw in [lo, hi); advances the stream by one step."""
        if not lo < hi:
            raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def uniform_array(self, shape, lo: float, hi: float) -> np.ndarray:
        """Array of uniform draws in [lo, hi), row-major fill order."""
        if not lo < hi:
            raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
        n = int(np.prod(shape))
        out = np.empty(n)
        for i in range(n):
            out[i] = lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0 ** -53)
        return out.reshape(shape)

    def next_below(self, n: int) -> int:
        """Integer in [0, n). Plain modulo; bias is negligible for n << 2^64."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.next_below(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def spawn(self) -> "Rng":
        """Child generator with a seed drawn from this stream."""
        return Rng(self.next_u64())
