"""Integer approximation sequences and tail schedules over a supported profile.

Given convex weights x, ``xa_sequence`` picks one index per step so that the
running counts a_k never fall below floor(k * x). Reversing that sequence over
the support profiles gives a schedule whose every suffix averages close to
the target payoff.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .game import Game, Profile
from .values import SupportedProfile


@dataclass(frozen=True)
class XaSequence:
    x: tuple[Fraction, ...]
    increments: tuple[int, ...]

    @cached_property
    def prefix_counts(self) -> tuple[tuple[int, ...], ...]:
        """a_0, a_1, ..., a_kmax."""
        counts = [0] * len(self.x)
        out = [tuple(counts)]
        for j in self.increments:
            counts[j] += 1
            out.append(tuple(counts))
        return tuple(out)

    def counts_matrix(self) -> np.ndarray:
        """Row k holds a_{k+1}."""
        onehot = np.zeros((len(self.increments), len(self.x)), dtype=np.int64)
        onehot[np.arange(len(self.increments)), self.increments] = 1
        return np.cumsum(onehot, axis=0)


def _common_scale(x: Sequence[Fraction]) -> tuple[list[int], int]:
    den = math.lcm(*(q.denominator for q in x))
    return [int(q * den) for q in x], den


def xa_sequence(x: Sequence, k_max: int) -> XaSequence:
    """Greedy counts: step k increments j0 = argmin floor((a_j + 1) / x_j), lowest index on ties."""
    x = tuple(Fraction(v) for v in x)
    if not x or any(v <= 0 for v in x) or sum(x) != 1:
        raise ValueError("x must be positive rationals summing to 1")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    nums, den = _common_scale(x)
    # floor((a+1)/x_j) = ((a+1)*den) // nums[j]
    heap = [(den // nums[j], j) for j in range(len(x))]
    heapq.heapify(heap)
    counts = [0] * len(x)
    increments = []
    for _ in range(k_max):
        _, j = heapq.heappop(heap)
        increments.append(j)
        counts[j] += 1
        heapq.heappush(heap, (((counts[j] + 1) * den) // nums[j], j))
    return XaSequence(x, tuple(increments))


def xa_violations(seq: XaSequence) -> list[str]:
    """Check the sequence invariants exactly; returns a list of failures (empty if sound)."""
    problems = []
    if not seq.increments:
        return problems
    nums, den = _common_scale(seq.x)
    k_max = len(seq.increments)
    a = seq.counts_matrix()
    k = np.arange(1, k_max + 1, dtype=np.int64)
    if not np.array_equal(a.sum(axis=1), k):
        problems.append("sum of counts differs from k")
    if np.any(np.diff(a, axis=0) < 0):
        problems.append("counts not monotone")
    big = den * k_max >= 2**62
    n = np.array(nums, dtype=object if big else np.int64)
    kk = k.astype(object) if big else k
    floors = (kk[:, None] * n[None, :]) // den
    if np.any(a < floors):
        problems.append("a_{k,j} fell below floor(k x_j)")
    return problems


@dataclass(frozen=True)
class TailSchedule:
    profiles: tuple[Profile, ...]
    source: SupportedProfile

    def __len__(self) -> int:
        return len(self.profiles)


def tail_bound_violations(game: Game, schedule: TailSchedule) -> list[int]:
    """Suffix lengths k whose average payoff drops below p - r/k for some player."""
    p = schedule.source.value
    r = len(schedule.source.profiles)
    totals = [Fraction(0)] * game.player_count
    bad = []
    for k, s in enumerate(reversed(schedule.profiles), start=1):
        row = game.u(s)
        for i in game.players:
            totals[i] += row[i]
        if any(totals[i] < k * p[i] - r for i in game.players):
            bad.append(k)
    return bad


def tail_schedule(game: Game, support: SupportedProfile, n: int) -> TailSchedule:
    """Round-by-round pure profiles whose last-k averages stay within r/k of the target."""
    if n < 1:
        raise ValueError("n must be at least 1")
    seq = xa_sequence(support.weights, n)
    # round k (1-based) uses the increment that took a_{n-k} to a_{n-k+1}
    profiles = tuple(support.profiles[j] for j in reversed(seq.increments))
    schedule = TailSchedule(profiles, support)
    bad = tail_bound_violations(game, schedule)
    if bad:
        raise RuntimeError(f"tail bound violated at suffix lengths {bad[:5]}")
    return schedule
