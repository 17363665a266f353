"""Portable deterministic randomness for seeded runs.

The generator is SplitMix64 (Steele, Lea, Flood 2014): a 64-bit counter
advanced by the golden-gamma constant and scrambled by two xor-multiply
rounds.  It is trivial to reimplement in any language, which keeps seeded
runs reproducible across implementations.  Bounded draws use the
multiply-shift reduction ``(x * n) >> 64`` rather than rejection sampling,
so a draw always consumes exactly one raw output.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def scramble(x: int) -> int:
    """One SplitMix64 output round applied to an arbitrary 64-bit value."""
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Seedable stream of 64-bit values with documented derived streams."""

    def __init__(self, seed: int) -> None:
        self.seed = seed & _MASK
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return scramble(self._state)

    def below(self, n: int) -> int:
        """Uniform-ish draw in [0, n); exact enough for lattice offsets."""
        if n <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by ``below``."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def fork(self, tag: int) -> "SplitMix64":
        """Child stream for purpose ``tag``, independent of draw order.

        The child seed is ``scramble(seed xor (tag + 1) * gamma)``, a pure
        function of the parent seed and the tag, so reordering unrelated
        draws never perturbs a derived stream.
        """
        child = scramble(self.seed ^ (((tag + 1) * _GAMMA) & _MASK))
        return SplitMix64(child)
