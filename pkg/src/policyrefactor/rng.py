"""Seeded PCG32 random number generator.

This is the single RNG used by all environments and data pipelines. It is a
faithful implementation of the PCG-XSH-RR 32-bit generator (O'Neill, 2014),
chosen because it is trivial to reimplement bit-exactly in other languages.
Any engine that wants to replay or regenerate an episode stream must
reproduce this exact draw sequence, including the bounded-draw rejection
loop below.

Per-episode derivation rule (shared with the accelerated rollout engine):
episode ``i`` of a run seeded with ``base_seed`` uses
``Pcg32(seed=base_seed ^ i, stream=i)``.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_MULT = 6364136223846793005


class Pcg32:
    """PCG-XSH-RR generator with 64-bit state and stream."""

    __slots__ = ("state", "inc")

    def __init__(self, seed: int, stream: int = 0):
        self.inc = (((stream & _MASK64) << 1) | 1) & _MASK64
        self.state = 0
        self.next_u32()
        self.state = (self.state + (seed & _MASK64)) & _MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self.state
        self.state = (old * _MULT + self.inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & _MASK32

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via the classic PCG rejection loop."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = ((1 << 32) - bound) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def next_bool(self, p: float) -> bool:
        """Bernoulli draw; compares one u32 against a fixed integer threshold.

        Exactly one u32 is consumed per call regardless of ``p``.
        """
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {p}")
        threshold = int(p * 4294967296.0)
        return self.next_u32() < threshold

    def next_float(self) -> float:
        """Uniform float in [0, 1) with 32 bits of precision."""
        return self.next_u32() / 4294967296.0

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, drawing with next_below from the top down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def spawn(self, key: int) -> "Pcg32":
        """Child generator with a documented (seed, stream) derivation."""
        return Pcg32(seed=self.next_u32() ^ (key & _MASK64), stream=key)


def episode_rng(base_seed: int, episode_index: int) -> Pcg32:
    """Canonical per-episode generator, shared across engine implementations."""
    return Pcg32(seed=(base_seed ^ episode_index) & _MASK64, stream=episode_index)
