"""Decision procedures: CONSTANT / LINEAR / UNKNOWN verdicts with certificates.

All procedures normalize the game first (identity on games already in
[0, 1]); certificates refer to ``normalize(game)``.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .builders import (
    EFFECTIVE,
    GENERAL,
    MIXED_MINMAX,
    OBSERVABLE_VARIANT,
    PURE_MINMAX,
    SUBSET_T,
    SUFFAPP,
    T_PURE_MINMAX,
    TWO_PLAYER_CASE1,
    TWO_PLAYER_CASE2,
    BuildCertificate,
    Reward,
    certificate_margins,
    repeat_ne_certificate,
)
from .config import CapExceeded, caps
from .game import Game, MixedProfile, format_fraction, normalize
from .values import (
    IncompleteSearch,
    SupportedProfile,
    best_responding_columns,
    constrained_profile,
    feasible_profile,
    mixed_minmax,
    ne_search,
    pure_minmax,
    pure_ne,
    strict_ir_ne,
    t_pure_minmax,
)

CONSTANT = "CONSTANT"
LINEAR = "LINEAR"
UNKNOWN = "UNKNOWN"
EXACT = "EXACT"
BOUNDED_SEARCH = "BOUNDED_SEARCH"


@dataclass(frozen=True)
class Verdict:
    result: str
    theorem: str
    exactness: str
    certificate: BuildCertificate | None = None
    refutations: tuple[dict, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        data = {"result": self.result, "theorem": self.theorem, "exactness": self.exactness}
        if self.certificate is not None:
            data["certificate"] = self.certificate.to_json()
        data["refutations"] = list(self.refutations)
        data.update(self.extra)
        return data


def _fmt(values: Sequence[Fraction]) -> list[str]:
    return [format_fraction(v) for v in values]


def _require_two(game: Game):
    if game.player_count != 2:
        raise ValueError("this procedure needs exactly two players")


def _check_cap(game: Game):
    if game.player_count > caps().max_players:
        raise CapExceeded(f"{game.player_count} players exceeds the cap of {caps().max_players}")


def _exactness(game: Game) -> str:
    return EXACT if game.player_count == 2 else BOUNDED_SEARCH


def _subsets_largest_first(players: Sequence[int]):
    for size in range(len(players), -1, -1):
        yield from itertools.combinations(players, size)


# -- two players ------------------------------------------------------------------


def two_player_construction(game: Game) -> BuildCertificate | None:
    """Case-1/case-2 certificate for ``normalize(game)`` whenever the second two-player disjunct holds, pure NE or not."""
    _require_two(game)
    game = normalize(game)
    bounds = [pure_minmax(game, i).value for i in game.players]
    return _two_player_certificate(game, bounds, PURE_MINMAX)[0]


def _two_player_certificate(game: Game, bounds, punishment: str, subset=()) -> tuple[BuildCertificate | None, list[dict]]:
    """Case analysis shared by the two-player deciders.

    ``bounds`` are the phase-1 punishment values; the certificate uses the
    first player with a strictly individually rational stage NE.
    """
    refutations = []
    sp = feasible_profile(game, bounds)
    if sp is None:
        refutations.append({"condition": "feasible_profile", "bounds": _fmt(bounds), "status": "infeasible"})
    found = None
    for j in game.players:
        cert = strict_ir_ne(game, j)
        if cert is not None:
            found = (j, cert)
            break
        refutations.append({
            "condition": "strict_ir_ne", "player": j,
            "minmax": format_fraction(mixed_minmax(game, j).value), "status": "none",
        })
    if sp is None or found is None:
        return None, refutations
    j, ne = found
    i = 1 - j
    vi = mixed_minmax(game, i).value
    if game.max_payoff(i) == vi:
        s = next(s for s in sp.profiles if game.payoff(s, j) >= bounds[j])
        support = SupportedProfile.of(game, [s], [Fraction(1)])
        rewards = (Reward(j, ne.profile),)
        cert = BuildCertificate(
            TWO_PLAYER_CASE1, support, rewards, punishment=punishment, subset=tuple(subset),
            deltas=certificate_margins(game, TWO_PLAYER_CASE1, rewards), ignored=(i,),
        )
    else:
        s = next(s for s in game.profiles if game.payoff(s, i) == game.max_payoff(i))
        rewards = (Reward(i, MixedProfile.pure(game, s)), Reward(j, ne.profile))
        cert = BuildCertificate(
            TWO_PLAYER_CASE2, sp, rewards, punishment=punishment, subset=tuple(subset),
            deltas=certificate_margins(game, TWO_PLAYER_CASE2, rewards),
        )
    return cert, []


def decide_two_player(game: Game) -> Verdict:
    """Pure NE, or a purely individually rational feasible profile plus a strictly IR stage NE."""
    _require_two(game)
    game = normalize(game)
    ne = pure_ne(game)
    if ne:
        return Verdict(CONSTANT, "two_player", EXACT, repeat_ne_certificate(MixedProfile.pure(game, ne[0])))
    bounds = [pure_minmax(game, i).value for i in game.players]
    cert, refutations = _two_player_certificate(game, bounds, PURE_MINMAX)
    if cert is not None:
        return Verdict(CONSTANT, "two_player", EXACT, cert)
    refutations.insert(0, {"condition": "pure_ne", "status": "none"})
    return Verdict(LINEAR, "two_player", EXACT, None, tuple(refutations))


def decide_subset_two(game: Game, i: int) -> Verdict:
    """Can player i alone keep O(1) randomness in a two-player repeated game?"""
    _require_two(game)
    game = normalize(game)
    ne = ne_search(game, (), pure_players={i})
    if ne is not None:
        return Verdict(CONSTANT, "subset_two", EXACT, repeat_ne_certificate(ne.profile), extra={"player": i})
    bounds = [t_pure_minmax(game, j, frozenset({i})).value for j in game.players]
    cert, refutations = _two_player_certificate(game, bounds, T_PURE_MINMAX, (i,))
    if cert is not None:
        return Verdict(CONSTANT, "subset_two", EXACT, cert, extra={"player": i})
    refutations.insert(0, {"condition": "ne_with_pure_player", "player": i, "status": "none"})
    return Verdict(LINEAR, "subset_two", EXACT, None, tuple(refutations), extra={"player": i})


@dataclass(frozen=True)
class OmegaTwo:
    both_linear: bool
    all_ne_fully_mixed: bool
    no_strict_ir_ne: bool
    infeasible_mixed_pure: tuple[bool, bool]

    def __bool__(self) -> bool:
        return self.both_linear

    def to_json(self) -> dict:
        return {
            "both_players_linear": self.both_linear,
            "all_ne_fully_mixed": self.all_ne_fully_mixed,
            "no_strict_ir_ne": self.no_strict_ir_ne,
            "infeasible_mixed_pure": list(self.infeasible_mixed_pure),
        }


def decide_omega_two(game: Game) -> OmegaTwo:
    """Do all repeated-game equilibria need linear randomness from both players?"""
    _require_two(game)
    game = normalize(game)
    fully_mixed = not pure_ne(game) and all(
        ne_search(game, (), pure_players={p}) is None for p in game.players
    )
    no_strict = all(strict_ir_ne(game, j) is None for j in game.players)
    v = [pure_minmax(game, j).value for j in game.players]
    vt = [mixed_minmax(game, j).value for j in game.players]
    infeasible = (
        feasible_profile(game, [vt[0], v[1]]) is None,
        feasible_profile(game, [v[0], vt[1]]) is None,
    )
    both = fully_mixed and (no_strict or all(infeasible))
    return OmegaTwo(both, fully_mixed, no_strict, infeasible)


# -- the general engine -------------------------------------------------------------


@dataclass
class _Outcome:
    certificate: BuildCertificate | None = None
    refutations: list = field(default_factory=list)
    certified: bool = True  # every failure recorded is an exact refutation


def _order(game, a0, a1, bounds_hi, bounds_lo, indifference: bool):
    """Reverse greedy: repeatedly place last any player admissible against the rest.

    Admissibility only gets easier as the remaining set shrinks, so the
    greedy finds an ordering whenever one exists. Returns (order, profiles)
    or (None, stuck set, certified flag).
    """
    remaining = list(a1)
    order, profiles = [], []
    certified = True
    while remaining:
        B = set(a0) | set(remaining)
        placed = None
        for i in remaining:
            indiff = set(a1) - B if indifference else ()
            try:
                prof = constrained_profile(game, B, i, bounds_hi[i], indiff)
            except IncompleteSearch:
                prof = None
                if game.max_payoff(i) > bounds_lo[i]:
                    certified = False
            else:
                if prof is None and game.player_count > 2 and game.max_payoff(i) > bounds_lo[i]:
                    certified = False
            if prof is not None:
                placed = (i, prof)
                break
        if placed is None:
            return None, tuple(remaining), certified
        order.insert(0, placed[0])
        profiles.insert(0, placed[1])
        remaining.remove(placed[0])
    return order, profiles, certified


def _engine(
    game: Game,
    lp_bounds: Sequence[Fraction],
    punishment: str,
    subset=(),
    variants=(GENERAL, SUFFAPP),
    target: Sequence[Fraction] | None = None,
    general_tag: str = GENERAL,
) -> _Outcome:
    out = _Outcome()
    hi = [mixed_minmax(game, i).value for i in game.players]
    lo = [mixed_minmax(game, i).lower for i in game.players]
    for a0 in _subsets_largest_first(list(game.players)):
        a1 = [i for i in game.players if i not in a0]
        cols = best_responding_columns(game, a0)
        sp = feasible_profile(game, lp_bounds, cols, target)
        if sp is None:
            out.refutations.append({"a0": list(a0), "lp": "infeasible"})
            continue
        if GENERAL in variants:
            nes = []
            try:
                for i in a1:
                    ne = strict_ir_ne(game, i)
                    if ne is None:
                        break
                    if ne.profile not in nes:
                        nes.append(ne.profile)
                else:
                    rewards = tuple(Reward(None, p) for p in nes)
                    out.certificate = BuildCertificate(
                        general_tag, sp, rewards, a0=tuple(a0), punishment=punishment, subset=tuple(subset),
                        deltas=certificate_margins(game, GENERAL, rewards, a0),
                    )
                    return out
            except IncompleteSearch:
                pass
        if SUFFAPP in variants or OBSERVABLE_VARIANT in variants:
            kind = SUFFAPP if SUFFAPP in variants else OBSERVABLE_VARIANT
            order, profiles, certified = _order(game, a0, a1, hi, lo, indifference=kind == SUFFAPP)
            if order is not None:
                rewards = tuple(Reward(i, p) for i, p in zip(order, profiles))
                out.certificate = BuildCertificate(
                    kind, sp, rewards, a0=tuple(a0), punishment=punishment, subset=tuple(subset),
                    deltas=certificate_margins(game, kind, rewards),
                )
                return out
            out.refutations.append({"a0": list(a0), "stuck": list(profiles)})
            out.certified &= certified
    return out


def decide_observable(game: Game) -> Verdict:
    """Existence of an ordering f with a purely IR support, distributions observable."""
    _check_cap(game)
    game = normalize(game)
    v = [pure_minmax(game, i).value for i in game.players]
    out = _engine(game, v, PURE_MINMAX, variants=(OBSERVABLE_VARIANT,))
    exactness = _exactness(game)
    if out.certificate is not None:
        return Verdict(CONSTANT, "observable", exactness, out.certificate)
    if out.certified:
        return Verdict(LINEAR, "observable", exactness, None, tuple(out.refutations))
    return Verdict(UNKNOWN, "observable", BOUNDED_SEARCH, None, tuple(out.refutations))


def _observable_refutation(game: Game, bounds_lo: Sequence[Fraction]) -> _Outcome:
    """The observable condition evaluated at certified lower bounds, for refutation only."""
    hi = [mixed_minmax(game, i).value for i in game.players]
    lo = [mixed_minmax(game, i).lower for i in game.players]
    out = _Outcome()
    for a0 in _subsets_largest_first(list(game.players)):
        a1 = [i for i in game.players if i not in a0]
        if feasible_profile(game, bounds_lo, best_responding_columns(game, a0)) is None:
            out.refutations.append({"a0": list(a0), "lp": "infeasible", "bounds": _fmt(bounds_lo)})
            continue
        # profiles must beat the true minmax, which is only known to exceed lo
        order, stuck, certified = _order(game, a0, a1, lo, lo, indifference=False)
        if order is not None:
            out.certified = False
            out.refutations.append({"a0": list(a0), "status": "not refuted"})
            continue
        out.refutations.append({"a0": list(a0), "stuck": list(stuck)})
        out.certified &= certified
        if hi != lo:
            out.certified = False
    return out


def decide_general(game: Game, n0_cap: int | None = None) -> Verdict:
    """Three-valued verdict for the standard repeated game with any number of players.

    ``n0_cap`` bounds the length of the concatenated stage equilibria; the
    search only concatenates one stage NE per rewarded player, so any cap of
    at least the player count has the same effect.
    """
    _check_cap(game)
    game = normalize(game)
    cap = caps().n0_cap if n0_cap is None else n0_cap
    v = [pure_minmax(game, i).value for i in game.players]
    variants = (GENERAL, SUFFAPP) if cap >= 1 else (SUFFAPP,)
    out = _engine(game, v, PURE_MINMAX, variants=variants)
    if out.certificate is not None and len(out.certificate.rewards) > cap:
        out.certificate = None
    if out.certificate is not None:
        return Verdict(CONSTANT, "general", _exactness(game), out.certificate)
    ref = _observable_refutation(game, v)
    if ref.certified:
        return Verdict(LINEAR, "general", _exactness(game), None, tuple(ref.refutations))
    return Verdict(UNKNOWN, "general", BOUNDED_SEARCH, None, tuple(out.refutations + ref.refutations))


def decide_effective(game: Game) -> Verdict:
    """Same engine with individually rational (mixed minmax) bounds and mixed punishments."""
    _check_cap(game)
    game = normalize(game)
    hi = [mixed_minmax(game, i).value for i in game.players]
    lo = [mixed_minmax(game, i).lower for i in game.players]
    out = _engine(game, hi, MIXED_MINMAX, variants=(GENERAL, SUFFAPP), general_tag=EFFECTIVE)
    if out.certificate is not None:
        return Verdict(CONSTANT, "effective", _exactness(game), out.certificate)
    ref = _observable_refutation(game, lo)
    if ref.certified:
        return Verdict(LINEAR, "effective", _exactness(game), None, tuple(ref.refutations))
    return Verdict(UNKNOWN, "effective", BOUNDED_SEARCH, None, tuple(out.refutations + ref.refutations))


def decide_subset(game: Game, subset: Sequence[int]) -> tuple[Verdict, SupportedProfile | None]:
    """Sufficient verdict for players in ``subset`` keeping O(1) randomness, plus the necessary-side profile.

    The two sides do not match in general; the gap is reported, not closed.
    """
    _check_cap(game)
    game = normalize(game)
    T = frozenset(subset)
    if T >= set(game.players):
        verdict = decide_general(game)
        v = [pure_minmax(game, i).value for i in game.players]
        return verdict, feasible_profile(game, v)
    witnesses = [t_pure_minmax(game, i, T) for i in game.players]
    hi = [w.value for w in witnesses]
    lo = [w.lower for w in witnesses]
    necessary = feasible_profile(game, lo)
    out = _engine(game, hi, T_PURE_MINMAX, sorted(T), variants=(GENERAL, SUFFAPP), general_tag=SUBSET_T)
    extra = {"subset": sorted(T), "necessary_feasible": necessary is not None}
    if out.certificate is not None:
        return Verdict(CONSTANT, "subset", _exactness(game), out.certificate, extra=extra), necessary
    if necessary is None:
        refutation = {"condition": "feasible_profile", "bounds": _fmt(lo), "status": "infeasible"}
        return Verdict(LINEAR, "subset", _exactness(game), None, (refutation,), extra=extra), None
    extra["gap"] = "necessary condition holds but no sufficient certificate was found"
    return Verdict(UNKNOWN, "subset", BOUNDED_SEARCH, None, tuple(out.refutations), extra=extra), necessary


def achievable_payoffs(game: Game, query: Sequence) -> BuildCertificate | None:
    """A certificate whose machines average ``query`` asymptotically, if the engine finds one."""
    game = normalize(game)
    query = tuple(Fraction(q) for q in query)
    if len(query) != game.player_count:
        raise ValueError("query needs one payoff per player")
    for s in pure_ne(game):
        if game.u(s) == query:
            return repeat_ne_certificate(MixedProfile.pure(game, s))
    v = [pure_minmax(game, i).value for i in game.players]
    out = _engine(game, v, PURE_MINMAX, target=query)
    return out.certificate
