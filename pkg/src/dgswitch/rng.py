"""Pinned 64-bit pseudo-random stream (splitmix64).

Everything that needs randomness in this package (GEOM points, initial
permutations, campaign seeds) draws from this generator so results are
reproducible across platforms and implementations.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 stream."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return _mix(self.state)

    def next_unit(self) -> float:
        """Uniform draw in [0, 1], computed as u64 / (2**64 - 1)."""
        return self.next_u64() / MASK64

    def bounded(self, k: int) -> int:
        """Unbiased integer in [0, k) by rejection of the low remainder."""
        if k <= 0:
            raise ValueError("k must be positive")
        threshold = (1 << 64) % k
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % k


def mix_seed(*parts: int) -> int:
    """Fold integers into a single 64-bit seed.

    Used to derive per-run seeds from a campaign base seed and the
    (size, instance, repetition) coordinates of a cell.
    """
    h = 0
    for p in parts:
        h = _mix(((h ^ (int(p) & MASK64)) + GOLDEN_GAMMA) & MASK64)
    return h


def fisher_yates(n: int, seed: int) -> list[int]:
    """Uniform random permutation of ``range(n)`` (Durstenfeld variant)."""
    rng = SplitMix64(seed)
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.bounded(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm
