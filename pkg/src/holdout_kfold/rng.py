"""SplitMix64 generator and the Fisher-Yates shuffle built on it.

Both are pinned bit-for-bit so a partition can be rebuilt in any language
from ``(n, seed)`` alone. Draws use ``next_u64() % (i + 1)``; the modulo
bias is below 2**-40 for any realistic ``n`` and is accepted.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next_u64() % bound


def shuffle_in_place(items: MutableSequence[T], rng: SplitMix64) -> None:
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_u64() % (i + 1)
        items[i], items[j] = items[j], items[i]


def permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of ``range(n)`` driven by ``SplitMix64(seed)``."""
    order = list(range(n))
    shuffle_in_place(order, SplitMix64(seed))
    return order
