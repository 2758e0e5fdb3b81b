"""SplitMix64 random streams.

All randomness in gwm_segment (segmenter initialization, random Fourier
features, sprite sampling, flow noise) comes from this generator so that a
seed reproduces the same numbers in any language. The update rule is
documented in docs/specs/prng.md.

The generator is used in counter form: output ``i`` of a stream with seed
``s`` is ``mix(s + (i + 1) * GOLDEN)`` modulo 2**64, which lets numpy produce
blocks of outputs without a Python loop.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
STREAM_GAMMA = np.uint64(0xD1B54A32D192ED03)

_MASK64 = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied element-wise to a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Stateful SplitMix64 stream.

    Args:
        seed: Any Python int; reduced modulo 2**64.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def next_uint64(self, n: int) -> np.ndarray:
        """Return the next ``n`` raw 64-bit outputs."""
        idx = np.arange(self.counter + 1, self.counter + 1 + n, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            state = np.full(n, self.seed, dtype=np.uint64) + idx * GOLDEN
            return mix64(state)

    def uniform(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) from the top 53 bits of each output."""
        bits = self.next_uint64(n) >> np.uint64(11)
        return bits.astype(np.float64) / float(1 << 53)

    def normal(self, n: int, scale: float = 1.0) -> np.ndarray:
        """``n`` Normal(0, scale**2) samples via Box-Muller (cosine branch only)."""
        u1 = 1.0 - self.uniform(n)  # (0, 1]
        u2 = self.uniform(n)
        return scale * np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def integers(self, low: int, high: int, n: int) -> np.ndarray:
        """``n`` integers uniform in [low, high] (inclusive)."""
        span = high - low + 1
        return low + np.floor(self.uniform(n) * span).astype(np.int64)

    def split(self, stream: int) -> SplitMix64:
        """Independent child stream; depends only on (seed, stream)."""
        return SplitMix64(split_seed(self.seed, stream))


def split_seed(seed: int, stream: int) -> int:
    """Child seed for ``stream``: ``mix(seed ^ mix((stream + 1) * STREAM_GAMMA))``."""
    with np.errstate(over="ignore"):
        salt = mix64(np.array([stream + 1], dtype=np.uint64) * STREAM_GAMMA)
        child = mix64(np.array([int(seed) & _MASK64], dtype=np.uint64) ^ salt)
    return int(child[0])
