"""Two-phase equilibrium machines built from certificates.

Phase 1 plays a pure tail schedule toward a target payoff profile; a single
deviator is punished (pure, mixed or T-pure minmax, per certificate) for the
rest of phase 1 and by their mixed minmax throughout phase 2. Phase 2 has a
length fixed by the certificate alone and plays reward blocks. Histories
with several deviators fall into a pure absorbing state.

State names: ``p1.<t>`` / ``p1.<t>.x<d>`` in phase 1, ``p2.<t>`` /
``p2.<t>.x<d>`` (d punished for the rest of the game) / ``p2.<t>.f<d>``
(d's own block replaced by their minmax) in phase 2, and ``absorb``.
Rounds and players are 0-based inside names.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .game import (
    Game,
    MixedProfile,
    expected_payoff,
    format_fraction,
    is_best_responding,
    is_nash,
    is_normalized,
    is_pure_best_response,
    profile_from_json,
    profile_to_json,
)
from .machine import (
    ABSORB,
    OBSERVABLE,
    STANDARD,
    State,
    StrategyMachine,
    repeat_machine,
)
from .schedule import tail_schedule
from .values import SupportedProfile, mixed_minmax, pure_minmax, t_pure_minmax

REPEAT_NE = "REPEAT_NE"
TWO_PLAYER_CASE1 = "TWO_PLAYER_CASE1"
TWO_PLAYER_CASE2 = "TWO_PLAYER_CASE2"
OBSERVABLE_VARIANT = "OBSERVABLE"
GENERAL = "GENERAL"
SUFFAPP = "SUFFAPP"
EFFECTIVE = "EFFECTIVE"
SUBSET_T = "SUBSET_T"
VARIANTS = (REPEAT_NE, TWO_PLAYER_CASE1, TWO_PLAYER_CASE2, OBSERVABLE_VARIANT, GENERAL, SUFFAPP, EFFECTIVE, SUBSET_T)

PURE_MINMAX = "PURE_MINMAX"
MIXED_MINMAX = "MIXED_MINMAX"
T_PURE_MINMAX = "T_PURE_MINMAX"


class InvalidCertificate(ValueError):
    """A certificate fails its side conditions."""


class HorizonTooShort(ValueError):
    def __init__(self, n: int, minimum: int):
        super().__init__(f"horizon {n} is below the minimum horizon {minimum}")
        self.minimum = minimum


@dataclass(frozen=True)
class Reward:
    """A phase-2 block profile; ``player`` is the rewarded player, or None for a plain stage NE."""

    player: int | None
    profile: MixedProfile


@dataclass(frozen=True)
class BuildCertificate:
    variant: str
    support: SupportedProfile | None = None
    rewards: tuple[Reward, ...] = ()
    a0: tuple[int, ...] = ()
    punishment: str = PURE_MINMAX
    subset: tuple[int, ...] = ()
    deltas: tuple[Fraction, ...] = ()
    ignored: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidCertificate(f"unknown variant {self.variant!r}")
        if self.punishment not in (PURE_MINMAX, MIXED_MINMAX, T_PURE_MINMAX):
            raise InvalidCertificate(f"unknown punishment mode {self.punishment!r}")

    def to_json(self) -> dict:
        data = {"variant": self.variant, "punishment": self.punishment}
        if self.support is not None:
            data["support"] = {
                "profiles": [list(s) for s in self.support.profiles],
                "weights": [format_fraction(w) for w in self.support.weights],
                "value": [format_fraction(v) for v in self.support.value],
            }
        data["rewards"] = [
            {"player": r.player, "profile": profile_to_json(r.profile)} for r in self.rewards
        ]
        data["a0"] = list(self.a0)
        data["subset"] = list(self.subset)
        data["deltas"] = [format_fraction(d) for d in self.deltas]
        data["ignored"] = list(self.ignored)
        if self.notes:
            data["notes"] = list(self.notes)
        return data

    @classmethod
    def from_json(cls, data: dict, game: Game) -> BuildCertificate:
        support = None
        if data.get("support"):
            sp = data["support"]
            support = SupportedProfile.of(
                game, [tuple(s) for s in sp["profiles"]], [Fraction(w) for w in sp["weights"]]
            )
            if "value" in sp and tuple(Fraction(v) for v in sp["value"]) != support.value:
                raise InvalidCertificate("support value does not match its weights")
        return cls(
            variant=data["variant"],
            support=support,
            rewards=tuple(Reward(r["player"], profile_from_json(r["profile"])) for r in data.get("rewards", [])),
            a0=tuple(data.get("a0", ())),
            punishment=data.get("punishment", PURE_MINMAX),
            subset=tuple(data.get("subset", ())),
            deltas=tuple(Fraction(d) for d in data.get("deltas", ())),
            ignored=tuple(data.get("ignored", ())),
            notes=tuple(data.get("notes", ())),
        )


# -- lengths --------------------------------------------------------------------


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def punish_lengths(deltas: Sequence, s_count: int) -> list[int]:
    """k_j = ceil((|S| + 1 + sum of earlier k) / delta_j)."""
    out = []
    for d in deltas:
        d = Fraction(d)
        if d <= 0:
            raise InvalidCertificate(f"punishment margin {d} is not positive")
        out.append(_ceil((s_count + 1 + sum(out)) / d))
    return out


def punishment_value(game: Game, i: int, mode: str, subset=()) -> Fraction:
    """Per-round payoff a best-responding player gets under a phase-1 punishment."""
    return _phase1_punisher(game, i, mode, subset).value


def _phase1_punisher(game, i, mode, subset):
    if mode == PURE_MINMAX:
        return pure_minmax(game, i)
    if mode == MIXED_MINMAX:
        return mixed_minmax(game, i)
    return t_pure_minmax(game, i, frozenset(subset))


def _stage_margin(game: Game, i: int, profile: MixedProfile) -> Fraction:
    return expected_payoff(game, profile, i) - mixed_minmax(game, i).value


# -- validation -----------------------------------------------------------------


def _check(cond: bool, message: str):
    if not cond:
        raise InvalidCertificate(message)


def _check_support(game: Game, cert: BuildCertificate, exempt=()):
    sp = cert.support
    _check(sp is not None, "certificate lacks a phase-1 support")
    _check(sp.check(game), "support value does not match the game")
    for i in game.players:
        if i in exempt:
            continue
        bound = punishment_value(game, i, cert.punishment, cert.subset)
        _check(sp.value[i] >= bound, f"target payoff of player {i} is below its punishment value {bound}")
    for i in cert.a0:
        _check(
            all(is_pure_best_response(game, i, s) for s in sp.profiles),
            f"player {i} in A0 does not best respond in every support profile",
        )


def validate(game: Game, cert: BuildCertificate) -> list[int]:
    """Check the certificate's side conditions; returns the phase-2 block lengths."""
    _check(is_normalized(game), "payoffs must lie in [0, 1]")
    v = cert.variant
    s_count = game.profile_count
    if v == REPEAT_NE:
        _check(len(cert.rewards) == 1 and is_nash(game, cert.rewards[0].profile), "REPEAT_NE needs one stage equilibrium")
        return []

    if v == TWO_PLAYER_CASE1:
        _check(game.player_count == 2 and len(cert.rewards) == 1, "case 1 needs two players and one reward")
        (reward,) = cert.rewards
        j = reward.player
        i = 1 - j
        _check(cert.ignored == (i,), "case 1 ignores exactly the non-rewarded player")
        _check(is_nash(game, reward.profile), "reward profile is not a stage equilibrium")
        sp = cert.support
        _check(sp is not None and len(sp.profiles) == 1, "case 1 plays a single pure profile")
        s = sp.profiles[0]
        _check(game.payoff(s, i) == game.max_payoff(i), "phase-1 profile must give the ignored player their maximum")
        _check_support(game, cert, exempt=(i,))
        delta = _stage_margin(game, j, reward.profile)
        _check(delta > 0, f"reward margin {delta} is not positive")
        _check(cert.deltas == (delta,), "certificate margins do not match the game")
        return [_ceil(1 / delta)]

    if v in (TWO_PLAYER_CASE2, OBSERVABLE_VARIANT, SUFFAPP):
        _check_support(game, cert)
        owners = [r.player for r in cert.rewards]
        _check(None not in owners and len(set(owners)) == len(owners), "each reward block needs a distinct owner")
        _check(set(owners) | set(cert.a0) == set(game.players) and not set(owners) & set(cert.a0),
               "A0 and the rewarded players must partition the players")
        deltas = []
        for b, r in enumerate(cert.rewards):
            responders = set(cert.a0) | set(owners[: b + 1])
            for j in responders:
                _check(is_best_responding(game, j, r.profile), f"player {j} does not best respond in block {b}")
            if v == SUFFAPP:
                for j in owners[b + 1:]:
                    _check(_indifferent(game, j, r.profile), f"player {j} is not indifferent over its support in block {b}")
            if v == TWO_PLAYER_CASE2:
                _check(game.player_count == 2 and len(cert.rewards) == 2, "case 2 needs two players and two blocks")
            deltas.append(_stage_margin(game, r.player, r.profile))
        _check(all(d > 0 for d in deltas), f"reward margins {deltas} are not all positive")
        _check(cert.deltas == tuple(deltas), "certificate margins do not match the game")
        return punish_lengths(deltas, s_count)

    if v in (GENERAL, EFFECTIVE, SUBSET_T):
        _check_support(game, cert)
        a1 = [i for i in game.players if i not in cert.a0]
        for r in cert.rewards:
            _check(is_nash(game, r.profile), "every phase-2 block must be a stage equilibrium")
        if not a1:
            _check(cert.deltas == (), "no margins expected when A1 is empty")
            return []
        _check(cert.rewards, "A1 is nonempty but no stage equilibria were given")
        n0 = len(cert.rewards)
        totals = [sum(expected_payoff(game, r.profile, i) for r in cert.rewards) for i in a1]
        delta = min(t - n0 * mixed_minmax(game, i).value for t, i in zip(totals, a1))
        _check(delta > 0, f"concatenation margin {delta} is not positive")
        _check(cert.deltas == (delta,), "certificate margin does not match the game")
        reps = _ceil((s_count + 1) / delta)
        return [1] * (reps * n0)
    raise InvalidCertificate(f"unsupported variant {v}")


def _indifferent(game: Game, j: int, profile: MixedProfile) -> bool:
    from .game import action_values

    values = action_values(game, j, profile)
    return len({values[a] for a in profile.support(j)}) == 1


def phase2_length(game: Game, cert: BuildCertificate) -> int:
    return sum(validate(game, cert))


def minimum_horizon(game: Game, cert: BuildCertificate) -> int:
    """Phase 1 gets at least one round, so punishments always start before phase 2."""
    return phase2_length(game, cert) + 1


def certificate_margins(game: Game, variant: str, rewards: Sequence[Reward], a0=()) -> tuple[Fraction, ...]:
    """The margins a certificate must carry, computed from its rewards."""
    if variant == TWO_PLAYER_CASE1:
        return (_stage_margin(game, rewards[0].player, rewards[0].profile),)
    if variant in (TWO_PLAYER_CASE2, OBSERVABLE_VARIANT, SUFFAPP):
        return tuple(_stage_margin(game, r.player, r.profile) for r in rewards)
    if variant in (GENERAL, EFFECTIVE, SUBSET_T):
        a1 = [i for i in game.players if i not in a0]
        if not a1:
            return ()
        n0 = len(rewards)
        return (min(
            sum(expected_payoff(game, r.profile, i) for r in rewards) - n0 * mixed_minmax(game, i).value
            for i in a1
        ),)
    return ()


# -- assembly -------------------------------------------------------------------


def build(game: Game, cert: BuildCertificate, n: int) -> StrategyMachine:
    """Assemble the equilibrium machine for horizon n."""
    lengths = validate(game, cert)
    if n < 1:
        raise HorizonTooShort(n, 1)
    if cert.variant == REPEAT_NE:
        m = repeat_machine(cert.rewards[0].profile)
        return StrategyMachine(m.model, m.states, m.initial, n, cert.to_json())
    if n <= sum(lengths):
        raise HorizonTooShort(n, sum(lengths) + 1)
    model = OBSERVABLE if cert.variant == OBSERVABLE_VARIANT else STANDARD
    blocks = _phase2_blocks(cert, lengths)
    states: dict[str, State] = {}
    absorb_profile = MixedProfile.pure(game, game.profiles[0])
    states[ABSORB] = State(absorb_profile, ABSORB)

    p2_len = len(blocks)
    l1 = n - p2_len

    def p2(t, tag=""):
        return f"p2.{t}{tag}" if t < p2_len else ABSORB

    phase2_punisher = {d: mixed_minmax(game, d).profile for d in game.players}

    # phase 2
    for t, (owner, profile, punishable, style) in enumerate(blocks):
        punish = {}
        for d in punishable:
            punish[d] = p2(t + 1, f".x{d}") if style == "rest" else p2(t + 1, f".f{d}")
        states[p2(t)] = State(profile, p2(t + 1), punish)
        for d in game.players:
            states[p2(t, f".x{d}")] = State(phase2_punisher[d], p2(t + 1, f".x{d}"))
            if cert.variant == SUFFAPP:
                flagged = phase2_punisher[d] if owner == d else profile
                states[p2(t, f".f{d}")] = State(flagged, p2(t + 1, f".f{d}"))

    # phase 1
    if l1 > 0:
        schedule = tail_schedule(game, cert.support, l1)
        punisher = {d: _phase1_punisher(game, d, cert.punishment, cert.subset).profile for d in game.players}

        def p1(t, tag=""):
            return f"p1.{t}{tag}" if t < l1 else p2(0, tag)

        for t, s in enumerate(schedule.profiles):
            punish = {d: p1(t + 1, f".x{d}") for d in game.players if d not in cert.ignored}
            states[p1(t)] = State(MixedProfile.pure(game, s), p1(t + 1), punish)
            for d in game.players:
                if d in cert.ignored:
                    continue
                states[p1(t, f".x{d}")] = State(punisher[d], p1(t + 1, f".x{d}"))
        initial = "p1.0"
    else:
        initial = p2(0)
    return StrategyMachine(model, states, initial, n, cert.to_json())


def _phase2_blocks(cert: BuildCertificate, lengths: list[int]):
    """(owner, profile, punishable players, style) for every phase-2 round."""
    rounds = []
    v = cert.variant
    if v in (GENERAL, EFFECTIVE, SUBSET_T):
        reps = len(lengths) // len(cert.rewards) if cert.rewards else 0
        for _ in range(reps):
            for r in cert.rewards:
                rounds.append((None, r.profile, (), "rest"))
        return rounds
    if v == TWO_PLAYER_CASE1:
        (r,) = cert.rewards
        return [(r.player, r.profile, (), "rest")] * lengths[0]
    owners = [r.player for r in cert.rewards]
    style = "flag" if v == SUFFAPP else "rest"
    for b, (r, k) in enumerate(zip(cert.rewards, lengths)):
        later = tuple(owners[b + 1:])
        rounds.extend([(r.player, r.profile, later, style)] * k)
    return rounds


def repeat_ne_certificate(profile: MixedProfile) -> BuildCertificate:
    return BuildCertificate(REPEAT_NE, rewards=(Reward(None, profile),))


def concatenation_machine(game: Game, profiles: Sequence[MixedProfile]) -> StrategyMachine:
    """Play the given stage profiles once each, in order, ignoring history."""
    states = {ABSORB: State(MixedProfile.pure(game, game.profiles[0]), ABSORB)}
    names = [f"c.{t}" for t in range(len(profiles))] + [ABSORB]
    for t, prof in enumerate(profiles):
        states[names[t]] = State(prof, names[t + 1])
    return StrategyMachine(STANDARD, states, names[0], len(profiles))
