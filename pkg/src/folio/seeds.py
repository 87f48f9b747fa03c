"""Deterministic random stream for design generation.

Responsibilities:
    * one fixed, documented generator (SplitMix64) so identical seeds
      reproduce identical designs on every platform and Python build;
    * draw helpers (uniform, weighted choice, bernoulli) that consume
      a documented number of raw draws each.

The stream is single-owner: a generation job creates one stream from its
seed and threads it through planning and pagination. Draws happen in a
frozen order (page size, margins, grid, pairing, alignment, paragraph
mark, header layout, caption placement, features, cover color, then
pagination flow draws in document order). Reordering draws is a breaking
change to regeneration stability.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SeededStream:
    """SplitMix64 sequence with a draw counter.

    Every helper consumes exactly one raw 64-bit draw except
    weighted_choice, which consumes one draw regardless of the number
    of options.
    """

    __slots__ = ("seed", "_state", "draws")

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self._state = self.seed
        self.draws = 0

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        z ^= z >> 31
        self.draws += 1
        return z

    def random(self) -> float:
        # 53-bit mantissa, same construction everywhere
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] inclusive. Modulo bias is below 2**-50
        for every range used here and is accepted for stability."""
        if hi < lo:
            raise ValueError("empty range")
        span = hi - lo + 1
        return lo + self.next_u64() % span

    def choice(self, seq):
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def weighted_choice(self, options, weights):
        """Pick options[i] with probability weights[i]/sum(weights)."""
        if len(options) != len(weights) or not options:
            raise ValueError("options and weights must align and be non-empty")
        total = float(sum(weights))
        if total <= 0:
            raise ValueError("weights must sum to a positive number")
        r = self.random() * total
        acc = 0.0
        for opt, w in zip(options, weights):
            if w < 0:
                raise ValueError("negative weight")
            acc += w
            if r < acc:
                return opt
        return options[-1]

    def chance(self, p: float) -> bool:
        return self.random() < p
