"""Stage-game values: minmax family, feasible payoff LPs and equilibrium search.

Every quantity here is exact. For more than two players the mixed minmax
is only bracketed: ``lower`` comes from letting the punishers correlate,
``value`` from the best punishment found among pure and single-mixer
profiles. Callers treat ``value`` as the punishment they can actually
deliver and ``lower`` as the bound they can certify refutations against.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .game import (
    Game,
    MixedProfile,
    Profile,
    best_response_set,
    expected_payoffs,
    insert_action,
    is_pure_best_response,
)
from .lp import OPTIMAL, LinearProgram


class IncompleteSearch(Exception):
    """A restricted search (more than two players) found nothing but cannot rule it out."""


@dataclass(frozen=True)
class MinmaxWitness:
    player: int
    value: Fraction
    lower: Fraction
    profile: MixedProfile
    responder_action: int

    @property
    def exact(self) -> bool:
        return self.lower == self.value


@dataclass(frozen=True)
class SupportedProfile:
    """A feasible payoff vector with its support and convex weights."""

    profiles: tuple[Profile, ...]
    weights: tuple[Fraction, ...]
    value: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.profiles) != len(self.weights) or not self.profiles:
            raise ValueError("support and weights must be nonempty and aligned")
        if any(w <= 0 for w in self.weights):
            raise ValueError("support weights must be positive")
        if sum(self.weights) != 1:
            raise ValueError("support weights must sum to 1")

    @classmethod
    def of(cls, game: Game, profiles: Sequence[Profile], weights: Sequence[Fraction]) -> SupportedProfile:
        value = [Fraction(0)] * game.player_count
        for s, w in zip(profiles, weights):
            for i, x in enumerate(game.u(s)):
                value[i] += w * x
        return cls(tuple(map(tuple, profiles)), tuple(Fraction(w) for w in weights), tuple(value))

    def check(self, game: Game) -> bool:
        return SupportedProfile.of(game, self.profiles, self.weights).value == self.value


@dataclass(frozen=True)
class PayoffConstraint:
    """``sum_i coeffs[i] * u_i >= bound`` (``>`` when strict)."""

    coeffs: tuple[Fraction, ...]
    bound: Fraction
    strict: bool = False

    @classmethod
    def above(cls, game: Game, i: int, bound, strict: bool = True) -> PayoffConstraint:
        coeffs = tuple(Fraction(1 if j == i else 0) for j in game.players)
        return cls(coeffs, Fraction(bound), strict)

    def holds(self, payoffs: Sequence[Fraction]) -> bool:
        lhs = sum(c * u for c, u in zip(self.coeffs, payoffs))
        return lhs > self.bound if self.strict else lhs >= self.bound


@dataclass(frozen=True)
class NeCertificate:
    profile: MixedProfile
    payoffs: tuple[Fraction, ...]
    strict: tuple[bool, ...]


# -- minmax family ------------------------------------------------------------


def _responder(game: Game, i: int, profile: MixedProfile) -> MixedProfile:
    _, argmax = best_response_set(game, i, profile)
    dist = tuple(Fraction(1 if a == argmax[0] else 0) for a in range(game.action_counts[i]))
    return profile.replace(i, dist)


def _pure_dist(count: int, a: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1 if b == a else 0) for b in range(count))


@lru_cache(maxsize=4096)
def pure_minmax(game: Game, i: int) -> MinmaxWitness:
    best_value = None
    best_profile = None
    for partial in game.opponent_profiles(i):
        reply = max(game.payoff(insert_action(partial, i, a), i) for a in range(game.action_counts[i]))
        if best_value is None or reply < best_value:
            best_value, best_profile = reply, partial
    a = next(
        a for a in range(game.action_counts[i])
        if game.payoff(insert_action(best_profile, i, a), i) == best_value
    )
    s = insert_action(best_profile, i, a)
    return MinmaxWitness(i, best_value, best_value, MixedProfile.pure(game, s), a)


def _single_mixer_lp(game: Game, i: int, fixed: dict[int, int], k: int):
    """min over sigma_k of i's best-response value, other punishers fixed."""
    lp = LinearProgram()
    y = lp.vars(game.action_counts[k])
    w = lp.var()
    lp.add({v: 1 for v in y}, "==", 1)
    for a in range(game.action_counts[i]):
        coeffs = {w: -1}
        for c in range(game.action_counts[k]):
            s = _assemble(game, fixed | {k: c, i: a})
            coeffs[y[c]] = game.payoff(s, i)
        lp.add(coeffs, "<=", 0)
    lp.minimize({w: 1})
    res = lp.solve()
    assert res.status == OPTIMAL
    return res.value, tuple(res[v] for v in y)


def _assemble(game: Game, actions: dict[int, int]) -> Profile:
    return tuple(actions[j] for j in game.players)


def _correlated_lower(game: Game, i: int, fixed: dict[int, int], mixers: list[int]) -> Fraction:
    """Punishers in ``mixers`` may correlate: an LP lower bound on the product minmax."""
    joint = list(itertools.product(*(range(game.action_counts[k]) for k in mixers)))
    lp = LinearProgram()
    z = lp.vars(len(joint))
    w = lp.var()
    lp.add({v: 1 for v in z}, "==", 1)
    for a in range(game.action_counts[i]):
        coeffs = {w: -1}
        for v, combo in zip(z, joint):
            actions = fixed | dict(zip(mixers, combo)) | {i: a}
            coeffs[v] = game.payoff(_assemble(game, actions), i)
        lp.add(coeffs, "<=", 0)
    lp.minimize({w: 1})
    res = lp.solve()
    assert res.status == OPTIMAL
    return res.value


def _inner_minmax(game: Game, i: int, fixed: dict[int, int], mixers: list[int]):
    """(lower, value, punisher profile) of the min over ``mixers``' strategies."""
    counts = game.action_counts
    if not mixers:
        value = max(game.payoff(_assemble(game, fixed | {i: a}), i) for a in range(counts[i]))
        dists = [_pure_dist(counts[j], fixed[j]) if j != i else _pure_dist(counts[i], 0) for j in game.players]
        return value, value, MixedProfile(tuple(dists))
    if len(mixers) == 1:
        (k,) = mixers
        value, dist = _single_mixer_lp(game, i, fixed, k)
        dists = [
            dist if j == k else _pure_dist(counts[j], fixed.get(j, 0))
            for j in game.players
        ]
        return value, value, MixedProfile(tuple(dists))
    lower = _correlated_lower(game, i, fixed, mixers)
    best = None
    for k in mixers:
        others = [j for j in mixers if j != k]
        for combo in itertools.product(*(range(counts[j]) for j in others)):
            sub = fixed | dict(zip(others, combo))
            value, _, profile = _inner_minmax(game, i, sub, [k])
            if best is None or value < best[0]:
                best = (value, profile)
    return lower, best[0], best[1]


def _t_minmax(game: Game, i: int, pure_players: Iterable[int]) -> MinmaxWitness:
    pure = sorted(set(pure_players) - {i})
    mixers = [j for j in game.players if j != i and j not in pure]
    best = None
    for combo in itertools.product(*(range(game.action_counts[j]) for j in pure)):
        lower, value, profile = _inner_minmax(game, i, dict(zip(pure, combo)), mixers)
        if best is None:
            best = [lower, value, profile]
        else:
            best[0] = min(best[0], lower)
            if value < best[1]:
                best[1], best[2] = value, profile
    lower, value, profile = best
    profile = _responder(game, i, profile)
    return MinmaxWitness(i, value, lower, profile, profile.pure_action(i))


@lru_cache(maxsize=4096)
def mixed_minmax(game: Game, i: int) -> MinmaxWitness:
    """Minmax against independently mixing opponents.

    Exact for two players (one LP). Otherwise ``lower``/``value`` bracket it.
    """
    witness = _t_minmax(game, i, ())
    if witness.exact:
        return witness
    pure = pure_minmax(game, i)
    if pure.value < witness.value:
        return MinmaxWitness(i, pure.value, witness.lower, pure.profile, pure.responder_action)
    return witness


@lru_cache(maxsize=4096)
def t_pure_minmax(game: Game, i: int, subset: frozenset[int]) -> MinmaxWitness:
    """Minmax when punishers in ``subset`` play pure and the rest may mix."""
    if set(game.players) - {i} <= set(subset):
        return pure_minmax(game, i)
    return _t_minmax(game, i, subset)


def minmax_vector(game: Game, mode: str = "pure", subset: frozenset[int] | None = None) -> tuple[MinmaxWitness, ...]:
    if mode == "pure":
        return tuple(pure_minmax(game, i) for i in game.players)
    if mode == "mixed":
        return tuple(mixed_minmax(game, i) for i in game.players)
    if mode == "t_pure":
        return tuple(t_pure_minmax(game, i, frozenset(subset or ())) for i in game.players)
    raise ValueError(f"unknown minmax mode {mode!r}")


# -- feasible payoff profiles ---------------------------------------------------


def feasible_profile(
    game: Game,
    lower_bounds: Sequence[Fraction | None],
    columns: Sequence[Profile] | None = None,
    target: Sequence[Fraction] | None = None,
) -> SupportedProfile | None:
    """Find a convex combination of pure profiles with payoff >= ``lower_bounds``.

    ``columns`` restricts the usable profiles; ``target`` demands the payoff
    vector exactly. The returned weights come from a basic solution, so at
    most m+1 profiles carry weight.
    """
    cols = list(game.profiles if columns is None else columns)
    if not cols:
        return None
    lp = LinearProgram()
    g = lp.vars(len(cols))
    lp.add({v: 1 for v in g}, "==", 1)
    for i in game.players:
        coeffs = {v: game.payoff(s, i) for v, s in zip(g, cols)}
        if target is not None:
            lp.add(coeffs, "==", target[i])
        if lower_bounds[i] is not None:
            lp.add(coeffs, ">=", lower_bounds[i])
    res = lp.solve()
    if res.status != OPTIMAL:
        return None
    chosen = [(s, res[v]) for v, s in zip(g, cols) if res[v] > 0]
    return SupportedProfile.of(game, [s for s, _ in chosen], [w for _, w in chosen])


def best_responding_columns(game: Game, players: Iterable[int]) -> list[Profile]:
    players = list(players)
    return [s for s in game.profiles if all(is_pure_best_response(game, i, s) for i in players)]


# -- equilibria -----------------------------------------------------------------


@lru_cache(maxsize=4096)
def pure_ne(game: Game) -> tuple[Profile, ...]:
    return tuple(
        s for s in game.profiles
        if all(is_pure_best_response(game, i, s) for i in game.players)
    )


def _subsets(n: int, sizes: Iterable[int] | None = None):
    sizes = range(1, n + 1) if sizes is None else sizes
    for size in sizes:
        yield from itertools.combinations(range(n), size)


def _support_pairs(game: Game, singleton: Sequence[bool] = (False, False)):
    """Support pairs ordered by total size, then lexicographically."""
    pairs = itertools.product(*(
        list(_subsets(c, [1] if single else None))
        for c, single in zip(game.action_counts, singleton)
    ))
    return sorted(pairs, key=lambda p: (len(p[0]) + len(p[1]), p))


BR, INDIFF, FREE = "br", "indiff", "free"


def _two_player_lp(game, supports, roles, constraints, objective_player=None):
    """Exact LP over strategies with the given supports and roles.

    A player with role ``br`` best responds; ``indiff`` is indifferent over
    its support; ``free`` is unconstrained. Returns (profile, objective value)
    or None. With strict constraints the LP maximizes the common slack.
    """
    lp = LinearProgram()
    x = [{a: lp.var() for a in supports[p]} for p in (0, 1)]
    w = [lp.var() if roles[p] != FREE else None for p in (0, 1)]
    for p in (0, 1):
        lp.add({v: 1 for v in x[p].values()}, "==", 1)
        if roles[p] == FREE:
            continue
        q = 1 - p
        for a in range(game.action_counts[p]):
            if roles[p] == INDIFF and a not in supports[p]:
                continue
            coeffs = {w[p]: -1}
            for b, v in x[q].items():
                s = (a, b) if p == 0 else (b, a)
                coeffs[v] = coeffs.get(v, 0) + game.payoff(s, p)
            lp.add(coeffs, "==" if a in supports[p] else "<=", 0)

    def payoff_expr(p):
        if roles[p] != FREE:
            return {w[p]: 1}
        q = 1 - p
        if len(supports[q]) == 1:
            (b,) = supports[q]
            return {v: game.payoff((a, b) if p == 0 else (b, a), p) for a, v in x[p].items()}
        if len(supports[p]) == 1:
            (a,) = supports[p]
            return {v: game.payoff((a, b) if p == 0 else (b, a), p) for b, v in x[q].items()}
        raise ValueError("payoff of a free player is bilinear here")

    strict = [c for c in constraints if c.strict]
    t = lp.var(None) if strict else None
    if t is not None:
        lp.add({t: 1}, "<=", 1)
    for c in constraints:
        coeffs = {}
        for p in (0, 1):
            if c.coeffs[p]:
                for v, k in payoff_expr(p).items():
                    coeffs[v] = coeffs.get(v, 0) + c.coeffs[p] * k
        if c.strict:
            coeffs[t] = -1
        lp.add(coeffs, ">=", c.bound)
    if objective_player is not None:
        lp.maximize(payoff_expr(objective_player))
    elif t is not None:
        lp.maximize({t: 1})
    res = lp.solve()
    if res.status != OPTIMAL:
        return None
    if t is not None and res[t] <= 0:
        return None
    dists = []
    for p in (0, 1):
        dists.append(tuple(res[x[p][a]] if a in x[p] else Fraction(0) for a in range(game.action_counts[p])))
    return MixedProfile(tuple(dists)), res.value


def _certificate(game: Game, profile: MixedProfile) -> NeCertificate:
    payoffs = expected_payoffs(game, profile)
    strict = tuple(payoffs[i] > mixed_minmax(game, i).value for i in game.players)
    return NeCertificate(profile, payoffs, strict)


def ne_search(
    game: Game,
    constraints: Sequence[PayoffConstraint] = (),
    pure_players: Iterable[int] = (),
) -> NeCertificate | None:
    """First Nash equilibrium meeting ``constraints``.

    Two players: complete support enumeration (smallest supports first).
    Players in ``pure_players`` are restricted to pure strategies. More
    players: pure and single-mixer equilibria only; raises
    ``IncompleteSearch`` when those run out.
    """
    pure_players = set(pure_players)
    if game.player_count == 2:
        singleton = [p in pure_players for p in (0, 1)]
        for supports in _support_pairs(game, singleton):
            found = _two_player_lp(game, supports, (BR, BR), constraints)
            if found is not None:
                return _certificate(game, found[0])
        return None
    for s in pure_ne(game):
        if all(c.holds(game.u(s)) for c in constraints):
            return _certificate(game, MixedProfile.pure(game, s))
    for k in game.players:
        if k in pure_players:
            continue
        found = _single_mixer_search(game, k, set(game.players), set(), constraints, None)
        if found is not None:
            return _certificate(game, found[0])
    raise IncompleteSearch("no pure or single-mixer equilibrium satisfies the constraints")


def _single_mixer_search(game, k, best_responders, indifferent, constraints, objective_player):
    """Profiles where only ``k`` mixes; all constraints are linear in sigma_k."""
    counts = game.action_counts
    others = [j for j in game.players if j != k]
    for combo in itertools.product(*(range(counts[j]) for j in others)):
        fixed = dict(zip(others, combo))
        values = [game.payoff(_assemble(game, fixed | {k: c}), k) for c in range(counts[k])]
        if k in best_responders:
            top = max(values)
            candidates = [tuple(c for c in range(counts[k]) if values[c] == top)]
        elif k in indifferent:
            candidates = [tuple(c for c in range(counts[k]) if values[c] == level) for level in sorted(set(values))]
        else:
            candidates = [tuple(range(counts[k]))]
        for support in candidates:
            if len(support) < 2:
                continue
            found = _mixer_lp(game, k, fixed, support, best_responders, constraints, objective_player)
            if found is not None:
                return found
    return None


def _mixer_lp(game, k, fixed, support, best_responders, constraints, objective_player):
    lp = LinearProgram()
    y = {c: lp.var() for c in support}
    lp.add({v: 1 for v in y.values()}, "==", 1)

    def payoff_expr(j, own=None):
        acts = fixed if own is None else fixed | {j: own}
        return {v: game.payoff(_assemble(game, acts | {k: c}), j) for c, v in y.items()}

    for b in best_responders:
        if b == k:
            continue
        on = payoff_expr(b)
        for a in range(game.action_counts[b]):
            if a == fixed[b]:
                continue
            alt = payoff_expr(b, a)
            lp.add({v: on[v] - alt[v] for v in y.values()}, ">=", 0)
    strict = [c for c in constraints if c.strict]
    t = lp.var(None) if strict else None
    if t is not None:
        lp.add({t: 1}, "<=", 1)
    for c in constraints:
        coeffs = {}
        for j in game.players:
            if c.coeffs[j]:
                for v, val in payoff_expr(j).items():
                    coeffs[v] = coeffs.get(v, 0) + c.coeffs[j] * val
        if c.strict:
            coeffs[t] = -1
        lp.add(coeffs, ">=", c.bound)
    if objective_player is not None:
        lp.maximize(payoff_expr(objective_player))
    elif t is not None:
        lp.maximize({t: 1})
    res = lp.solve()
    if res.status != OPTIMAL or (t is not None and res[t] <= 0):
        return None
    dists = []
    for j in game.players:
        if j == k:
            dists.append(tuple(res[y[c]] if c in y else Fraction(0) for c in range(game.action_counts[k])))
        else:
            dists.append(_pure_dist(game.action_counts[j], fixed[j]))
    return MixedProfile(tuple(dists)), res.value


def constrained_profile(
    game: Game,
    best_responders: Iterable[int],
    target: int,
    bound: Fraction,
    indifferent: Iterable[int] = (),
) -> MixedProfile | None:
    """A profile where ``best_responders`` best respond, ``indifferent``
    players are indifferent over their supports, and ``target`` gets
    strictly more than ``bound``.

    Exact for two players. For more, searches pure and single-mixer
    profiles; returns None only when no cell pays ``target`` above ``bound``,
    otherwise raises ``IncompleteSearch``.
    """
    B = set(best_responders)
    indifferent = set(indifferent) - B
    if not B and not indifferent:
        best = max(game.profiles, key=lambda s: (game.payoff(s, target), [-a for a in s]))
        return MixedProfile.pure(game, best) if game.payoff(best, target) > bound else None
    if game.player_count == 2:
        roles = tuple(BR if p in B else INDIFF if p in indifferent else FREE for p in (0, 1))
        other = 1 - target
        singleton = [False, False]
        if roles[target] == FREE:
            singleton[other] = True
        if roles[other] == FREE and roles[target] == FREE:
            singleton[target] = True
        for supports in _support_pairs(game, singleton):
            found = _two_player_lp(game, supports, roles, (), objective_player=target)
            if found is not None and found[1] > bound:
                return found[0]
        return None
    for s in game.profiles:
        if game.payoff(s, target) > bound and all(is_pure_best_response(game, b, s) for b in B):
            return MixedProfile.pure(game, s)
    for k in game.players:
        found = _single_mixer_search(game, k, B, indifferent, (), target)
        if found is not None and found[1] > bound:
            return found[0]
    if game.max_payoff(target) <= bound:
        return None
    raise IncompleteSearch("no pure or single-mixer profile meets the constraints")


def br_constrained_profile(game: Game, best_responders: Iterable[int], target: int, bound: Fraction) -> MixedProfile | None:
    return constrained_profile(game, best_responders, target, bound)


def strict_ir_ne(game: Game, i: int) -> NeCertificate | None:
    """A stage equilibrium paying ``i`` strictly more than its minmax."""
    bound = mixed_minmax(game, i).value
    if game.max_payoff(i) <= bound:
        return None
    return ne_search(game, [PayoffConstraint.above(game, i, bound)])
