"""Exact sampling from rational distributions with metered random bits.

Two samplers share one oracle interface:

* ``inversion_sample`` is the oracle-based inversion sampler. It starts from
  ``k0`` random bits and extends r one bit at a time until r clears every
  ambiguity window [b_i, b_i + i 2^-k).
* ``knuth_yao_sample`` walks the discrete distribution generating tree level by
  level, one bit per level.

Outcomes are 0-based indices into the distribution.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .config import caps


class TapeExhausted(Exception):
    """A fixed test tape ran out of bits."""


class TapeSource:
    """Replays a fixed bit string; raises ``TapeExhausted`` when empty."""

    def __init__(self, bits: str | Sequence[int]):
        self._bits = [int(b) for b in bits if str(b) in "01"]
        self.consumed = 0

    def bit(self) -> int:
        if self.consumed >= len(self._bits):
            raise TapeExhausted(f"tape exhausted after {self.consumed} bits")
        b = self._bits[self.consumed]
        self.consumed += 1
        return b

    def bits(self, k: int) -> int:
        value = 0
        for _ in range(k):
            value = 2 * value + self.bit()
        return value


class RandomSource:
    """Seeded pseudo-random bit stream, reproducible from ``seed``."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)
        self.consumed = 0

    def bit(self) -> int:
        self.consumed += 1
        return self._rng.getrandbits(1)

    def bits(self, k: int) -> int:
        if k == 0:
            return 0
        self.consumed += k
        return self._rng.getrandbits(k)


@dataclass
class PrecisionOracle:
    """Binary-prefix oracle for a rational distribution.

    ``prefix(i, k)`` is the integer formed by the first k bits of p_i after the
    binary point, using the expansion that does not end in repeating ones.
    That is exactly floor(p_i * 2^k).
    """

    distribution: tuple[Fraction, ...]
    calls: int = field(default=0, compare=False)

    def __post_init__(self):
        self.distribution = tuple(Fraction(p) for p in self.distribution)
        if not self.distribution or any(p <= 0 for p in self.distribution):
            raise ValueError("probabilities must be strictly positive")
        if sum(self.distribution) != 1:
            raise ValueError("probabilities must sum to 1")

    def __len__(self) -> int:
        return len(self.distribution)

    def prefix(self, i: int, k: int) -> int:
        self.calls += 1
        p = self.distribution[i]
        return (p.numerator << k) // p.denominator

    def bit(self, i: int, k: int) -> int:
        """k-th bit after the binary point (k >= 1)."""
        return self.prefix(i, k) & 1


def binary_expansion(p: Fraction) -> tuple[str, str, str]:
    """(integer part, preperiod, period) of p in base 2 by long division.

    Terminating expansions have an empty period; none end in repeating ones.

    >>> binary_expansion(Fraction(1, 3))
    ('0', '', '01')
    >>> binary_expansion(Fraction(3, 4))
    ('0', '11', '')
    """
    p = Fraction(p)
    if p < 0:
        raise ValueError("negative value")
    whole, rem = divmod(p.numerator, p.denominator)
    den = p.denominator
    seen: dict[int, int] = {}
    digits = []
    while rem and rem not in seen:
        seen[rem] = len(digits)
        rem *= 2
        digits.append(str(rem // den))
        rem %= den
    if not rem:
        return bin(whole)[2:], "".join(digits), ""
    start = seen[rem]
    return bin(whole)[2:], "".join(digits[:start]), "".join(digits[start:])


def shannon_entropy(p: Sequence) -> float:
    return -sum(float(q) * math.log2(float(q)) for q in p if q > 0) + 0.0


# -- inversion sampling -----------------------------------------------------------


@dataclass(frozen=True)
class Sample:
    outcome: int
    bits: int
    oracle_calls: int


def _resolve(oracle: PrecisionOracle, r: int, k: int) -> int | None:
    """Outcome for k-bit integer r, or None if r sits in an ambiguity window."""
    q = [oracle.prefix(i, k) for i in range(len(oracle))]
    b = 0
    outcome = None
    for i in range(1, len(q)):
        b += q[i - 1]
        if b <= r < b + i:
            return None
        if outcome is None and r < b:
            outcome = i - 1
    return len(q) - 1 if outcome is None else outcome


def inversion_sample(oracle: PrecisionOracle, source, k0: int | None = None) -> Sample:
    k = caps().k0 if k0 is None else k0
    calls_before = oracle.calls
    r = source.bits(k)
    used = k
    while True:
        found = _resolve(oracle, r, k)
        if found is not None:
            return Sample(found, used, oracle.calls - calls_before)
        k += 1
        r = 2 * r + source.bit()
        used += 1


@dataclass(frozen=True)
class TerminationProfile:
    masses: tuple[Fraction, ...]
    unresolved: Fraction
    expected_bits_partial: Fraction
    unresolved_by_depth: tuple[tuple[int, Fraction], ...]


def enumerate_termination(oracle: PrecisionOracle, depth: int, k0: int | None = None) -> TerminationProfile:
    """Run the inversion sampler over every tape of length <= ``depth`` at once.

    Prefixes that terminate contribute 2^-len to their outcome's mass; the
    rest carry forward one level deeper. The result is exact.
    """
    k0 = caps().k0 if k0 is None else k0
    if depth < k0:
        raise ValueError(f"depth must be at least {k0}")
    if depth > caps().enum_depth:
        raise ValueError(f"depth {depth} exceeds the configured cap {caps().enum_depth}")
    n = len(oracle)
    masses = [Fraction(0)] * n
    expected = Fraction(0)
    by_depth = []
    live = list(range(1 << k0))
    for k in range(k0, depth + 1):
        if k > k0:
            live = [2 * r + b for r in live for b in (0, 1)]
        stuck = []
        resolved = [0] * n
        for r in live:
            found = _resolve(oracle, r, k)
            if found is None:
                stuck.append(r)
            else:
                resolved[found] += 1
        weight = Fraction(1, 1 << k)
        expected += k * weight * sum(resolved)
        masses = [m + c * weight for m, c in zip(masses, resolved)]
        live = stuck
        by_depth.append((k, len(stuck) * weight))
    return TerminationProfile(tuple(masses), by_depth[-1][1], expected, tuple(by_depth))


# -- Knuth-Yao ------------------------------------------------------------------


def _leaves(oracle: PrecisionOracle, k: int) -> list[int]:
    return [i for i in range(len(oracle)) if oracle.bit(i, k)]


def knuth_yao_sample(oracle: PrecisionOracle, source) -> tuple[int, int]:
    """(outcome, bits consumed) from a lazy walk down the generating tree."""
    if len(oracle) == 1:
        return 0, 0
    d = 0
    k = 0
    while True:
        k += 1
        d = 2 * d + source.bit()
        leaves = _leaves(oracle, k)
        if d < len(leaves):
            return leaves[d], k
        d -= len(leaves)


def knuth_yao_expected_bits(oracle: PrecisionOracle, depth: int) -> Fraction:
    """sum_{k <= depth} k * L_k * 2^-k, a lower bound converging to the expected bits."""
    if len(oracle) == 1:
        return Fraction(0)
    total = Fraction(0)
    for k in range(1, depth + 1):
        total += Fraction(k * len(_leaves(oracle, k)), 1 << k)
    return total


def sample(oracle: PrecisionOracle, source, algo: str = "inversion") -> tuple[int, int]:
    if algo == "inversion":
        s = inversion_sample(oracle, source)
        return s.outcome, s.bits
    if algo == "ky":
        return knuth_yao_sample(oracle, source)
    raise ValueError(f"unknown sampler {algo!r}")
