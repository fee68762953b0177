"""SplitMix64 generator and the random rational draw used for initial data.

Bit-exact recipe (all arithmetic modulo 2**64)::

    state = state + 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

A random rational uses three consecutive outputs ``a, b, c``:
sign is ``-1`` if the top bit of ``a`` is set, else ``+1``;
numerator ``1 + b % 9``; denominator ``1 + c % 9``.
"""

from __future__ import annotations

from fractions import Fraction

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def rational(self) -> Fraction:
        sign = -1 if self.next() >> 63 else 1
        num = 1 + self.next() % 9
        den = 1 + self.next() % 9
        return Fraction(sign * num, den)
