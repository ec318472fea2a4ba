"""Finite normal-form games with exact rational payoffs."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

Profile = tuple[int, ...]


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` / integer / decimal strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an exact rational")
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, eq=False)
class Game:
    """An m-player game with a complete payoff tensor.

    ``table`` holds one payoff vector per pure profile, in lexicographic
    profile order (last player's action varies fastest).
    """

    action_counts: tuple[int, ...]
    table: tuple[tuple[Fraction, ...], ...]
    action_names: tuple[tuple[str, ...], ...] | None = None
    # per-player (scale, offset) such that normalized = scale * raw + offset
    affine: tuple[tuple[Fraction, Fraction], ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        m = len(self.action_counts)
        if m < 2:
            raise ValueError("a game needs at least two players")
        if any(c < 2 for c in self.action_counts):
            raise ValueError("every player needs at least two actions")
        if len(self.table) != math.prod(self.action_counts):
            raise ValueError("payoff table does not cover every pure profile")
        for row in self.table:
            if len(row) != m:
                raise ValueError("payoff vectors must have one entry per player")
        if self.action_names is not None and [len(n) for n in self.action_names] != list(self.action_counts):
            raise ValueError("action_names does not match action_counts")

    @classmethod
    def from_payoffs(
        cls,
        action_counts: Sequence[int],
        payoffs: Mapping[Profile, Sequence] | Sequence[Sequence],
        action_names=None,
    ) -> Game:
        """Build a game from a profile->vector map or a lexicographic list."""
        counts = tuple(int(c) for c in action_counts)
        if isinstance(payoffs, Mapping):
            rows = []
            for s in itertools.product(*(range(c) for c in counts)):
                if s not in payoffs:
                    raise ValueError(f"missing payoff for profile {s}")
                rows.append(tuple(as_fraction(v) for v in payoffs[s]))
        else:
            rows = [tuple(as_fraction(v) for v in row) for row in payoffs]
        names = tuple(tuple(n) for n in action_names) if action_names else None
        return cls(counts, tuple(rows), names)

    @classmethod
    def bimatrix(cls, row_payoffs, col_payoffs, action_names=None) -> Game:
        """Two-player game from row-player and column-player matrices."""
        rows = len(row_payoffs)
        cols = len(row_payoffs[0])
        table = [
            (as_fraction(row_payoffs[a][b]), as_fraction(col_payoffs[a][b]))
            for a in range(rows)
            for b in range(cols)
        ]
        return cls.from_payoffs((rows, cols), table, action_names)

    # -- structure -----------------------------------------------------------

    @property
    def players(self) -> range:
        return range(len(self.action_counts))

    @property
    def player_count(self) -> int:
        return len(self.action_counts)

    @property
    def profile_count(self) -> int:
        return len(self.table)

    @cached_property
    def profiles(self) -> tuple[Profile, ...]:
        return tuple(itertools.product(*(range(c) for c in self.action_counts)))

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = []
        acc = 1
        for c in reversed(self.action_counts):
            strides.append(acc)
            acc *= c
        return tuple(reversed(strides))

    def index(self, s: Profile) -> int:
        return sum(a * k for a, k in zip(s, self._strides))

    def u(self, s: Profile) -> tuple[Fraction, ...]:
        return self.table[self.index(s)]

    def payoff(self, s: Profile, i: int) -> Fraction:
        return self.table[self.index(s)][i]

    def opponent_profiles(self, i: int) -> Iterator[Profile]:
        """Pure profiles of all players but ``i`` (lexicographic)."""
        ranges = [range(c) for j, c in enumerate(self.action_counts) if j != i]
        return itertools.product(*ranges)

    def max_payoff(self, i: int) -> Fraction:
        return max(row[i] for row in self.table)

    # -- equality / hashing --------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return self.action_counts == other.action_counts and self.table == other.table

    def __hash__(self):
        return hash((self.action_counts, self.table))

    def action_label(self, i: int, a: int) -> str:
        if self.action_names:
            return self.action_names[i][a]
        return str(a)


def insert_action(partial: Profile, i: int, a: int) -> Profile:
    """Place player ``i``'s action into an opponents-only profile."""
    return partial[:i] + (a,) + partial[i:]


@dataclass(frozen=True)
class MixedProfile:
    """One probability vector per player; exact rationals summing to 1."""

    dists: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        for d in self.dists:
            if any(p < 0 for p in d):
                raise ValueError("negative probability")
            if sum(d) != 1:
                raise ValueError("distribution does not sum to 1")

    @classmethod
    def pure(cls, game: Game, s: Profile) -> MixedProfile:
        return cls(tuple(
            tuple(Fraction(1) if a == s[i] else Fraction(0) for a in range(c))
            for i, c in enumerate(game.action_counts)
        ))

    @classmethod
    def from_dists(cls, dists: Iterable[Iterable]) -> MixedProfile:
        return cls(tuple(tuple(as_fraction(p) for p in d) for d in dists))

    def support(self, i: int) -> tuple[int, ...]:
        return tuple(a for a, p in enumerate(self.dists[i]) if p > 0)

    def is_pure(self, i: int | None = None) -> bool:
        players = range(len(self.dists)) if i is None else (i,)
        return all(len(self.support(j)) == 1 for j in players)

    def pure_action(self, i: int) -> int:
        (a,) = self.support(i)
        return a

    def as_pure(self) -> Profile:
        return tuple(self.pure_action(i) for i in range(len(self.dists)))

    def replace(self, i: int, dist: Sequence[Fraction]) -> MixedProfile:
        dists = list(self.dists)
        dists[i] = tuple(dist)
        return MixedProfile(tuple(dists))

    def outcomes(self, skip: int | None = None) -> Iterator[tuple[Profile, Fraction]]:
        """Pure profiles with positive probability, with their probability.

        With ``skip`` set, that player's slot is left out of the profiles.
        """
        players = [j for j in range(len(self.dists)) if j != skip]
        supports = [[(a, self.dists[j][a]) for a in self.support(j)] for j in players]
        for combo in itertools.product(*supports):
            prob = Fraction(1)
            for _, p in combo:
                prob *= p
            yield tuple(a for a, _ in combo), prob


def _check_dims(game: Game, profile: MixedProfile):
    if len(profile.dists) != game.player_count or any(
        len(d) != c for d, c in zip(profile.dists, game.action_counts)
    ):
        raise ValueError("profile dimensions do not match the game")


def normalize(game: Game) -> Game:
    """Rescale each player's payoffs into [0, 1].

    Players already inside [0, 1] are left alone; others get the min-max
    map. Constant players map to 0.
    """
    rows = [list(r) for r in game.table]
    affine = []
    for i in game.players:
        col = [r[i] for r in game.table]
        lo, hi = min(col), max(col)
        if lo == hi:
            scale, offset = Fraction(0), Fraction(0)
        elif lo >= 0 and hi <= 1:
            scale, offset = Fraction(1), Fraction(0)
        else:
            scale = 1 / (hi - lo)
            offset = -lo * scale
        for r in rows:
            r[i] = scale * r[i] + offset
        affine.append((scale, offset))
    return Game(
        game.action_counts,
        tuple(tuple(r) for r in rows),
        game.action_names,
        tuple(affine),
    )


def is_normalized(game: Game) -> bool:
    return all(0 <= v <= 1 for row in game.table for v in row)


def expected_payoff(game: Game, profile: MixedProfile, i: int) -> Fraction:
    _check_dims(game, profile)
    total = Fraction(0)
    for s, prob in profile.outcomes():
        total += prob * game.payoff(s, i)
    return total


def expected_payoffs(game: Game, profile: MixedProfile) -> tuple[Fraction, ...]:
    _check_dims(game, profile)
    totals = [Fraction(0)] * game.player_count
    for s, prob in profile.outcomes():
        row = game.u(s)
        for i in game.players:
            totals[i] += prob * row[i]
    return tuple(totals)


def action_values(game: Game, i: int, profile: MixedProfile) -> list[Fraction]:
    """Expected payoff of each pure action of ``i`` against ``profile``'s opponents."""
    values = [Fraction(0)] * game.action_counts[i]
    for partial, prob in profile.outcomes(skip=i):
        for a in range(game.action_counts[i]):
            values[a] += prob * game.payoff(insert_action(partial, i, a), i)
    return values


def best_response_set(game: Game, i: int, profile: MixedProfile) -> tuple[Fraction, tuple[int, ...]]:
    """Best-response value and exact argmax set against the opponents in ``profile``.

    Player ``i``'s own entry in ``profile`` is ignored.
    """
    _check_dims(game, profile)
    values = action_values(game, i, profile)
    best = max(values)
    return best, tuple(a for a, v in enumerate(values) if v == best)


def is_best_responding(game: Game, i: int, profile: MixedProfile) -> bool:
    _, argmax = best_response_set(game, i, profile)
    return set(profile.support(i)) <= set(argmax)


def is_pure_best_response(game: Game, i: int, s: Profile) -> bool:
    mine = game.payoff(s, i)
    return all(
        game.payoff(s[:i] + (a,) + s[i + 1:], i) <= mine
        for a in range(game.action_counts[i])
    )


def is_nash(game: Game, profile: MixedProfile) -> bool:
    return all(is_best_responding(game, i, profile) for i in game.players)


# -- JSON ---------------------------------------------------------------------


def game_to_json(game: Game) -> dict:
    names = game.action_names or tuple(
        tuple(str(a) for a in range(c)) for c in game.action_counts
    )
    return {
        "players": game.player_count,
        "actions": [list(n) for n in names],
        "payoffs": {
            ",".join(map(str, s)): [format_fraction(v) for v in game.u(s)]
            for s in game.profiles
        },
    }


def game_from_json(data: Mapping) -> Game:
    actions = data["actions"]
    m = int(data.get("players", len(actions)))
    if len(actions) != m:
        raise ValueError("'players' does not match the length of 'actions'")
    counts = [len(a) for a in actions]
    payoffs = {}
    for key, vec in data["payoffs"].items():
        s = tuple(int(x) for x in key.split(","))
        if len(vec) != m:
            raise ValueError(f"payoff vector for {key} has wrong length")
        payoffs[s] = vec
    return Game.from_payoffs(counts, payoffs, actions)


def profile_to_json(profile: MixedProfile) -> list[list[str]]:
    return [[format_fraction(p) for p in d] for d in profile.dists]


def profile_from_json(data) -> MixedProfile:
    return MixedProfile.from_dists(data)
