"""Exact deviation checks against strategy machines and punishment-value oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .config import CapExceeded, caps
from .game import Game, format_fraction, insert_action
from .machine import OBSERVABLE, OFF, ON, Outcome, StrategyMachine, on_path_value
from .values import (
    IncompleteSearch,
    MinmaxWitness,
    NeCertificate,
    mixed_minmax,
    pure_minmax,
    strict_ir_ne,
    t_pure_minmax,
)

CONFORM = "conform"


@dataclass(frozen=True)
class DeviationReport:
    player: int
    on_path_value: Fraction
    best_deviation_value: Fraction
    policy: dict = field(repr=False, compare=False)

    @property
    def profitable(self) -> bool:
        return self.best_deviation_value > self.on_path_value

    @property
    def gain(self) -> Fraction:
        return self.best_deviation_value - self.on_path_value

    def to_json(self) -> dict:
        return {
            "player": self.player,
            "on_path_value": format_fraction(self.on_path_value),
            "best_deviation_value": format_fraction(self.best_deviation_value),
            "profitable": self.profitable,
            "policy": [
                {"round": t + 1, "state": s, "action": _option_label(o)}
                for (t, s), o in sorted(self.policy.items())
            ],
        }


def _option_label(option) -> str:
    if option == CONFORM:
        return CONFORM
    if isinstance(option, tuple):
        return f"{option[0]}:{OFF}"
    return str(option)


def _options(machine: StrategyMachine, game: Game, i: int):
    if machine.model == OBSERVABLE:
        return [CONFORM] + [(a, OFF) for a in range(game.action_counts[i])]
    return list(range(game.action_counts[i]))


def _option_outcomes(machine: StrategyMachine, state: str, i: int, option):
    """(outcome, probability) pairs when i takes ``option`` and everyone else conforms."""
    st = machine.states[state]
    m = len(st.profile.dists)
    if option == CONFORM:
        yield from machine.on_path_outcomes(state)
        return
    a = option[0] if isinstance(option, tuple) else option
    for partial, q in st.profile.outcomes(skip=i):
        actions = insert_action(partial, i, a)
        if machine.model == OBSERVABLE:
            markers = tuple(OFF if j == i else ON for j in range(m))
            yield Outcome(actions, markers), q
        else:
            yield Outcome(actions), q


def best_deviation_value(machine: StrategyMachine, game: Game, n: int, i: int) -> DeviationReport:
    """Exact value of i's best response to the machine over n rounds (finite MDP)."""
    if n < 1:
        raise ValueError("horizon must be at least 1")
    machine.check_game(game)
    options = _options(machine, game, i)
    transitions: dict[str, list] = {}

    def table(s):
        if s not in transitions:
            rows = []
            for o in options:
                rows.append((o, [
                    (game.payoff(out.actions, i), machine.next_state(s, out), q)
                    for out, q in _option_outcomes(machine, s, i, o)
                ]))
            transitions[s] = rows
        return transitions[s]

    limit = caps().mdp_states
    layers = [[machine.initial]]
    total = 1
    for _ in range(n - 1):
        seen: dict[str, None] = {}
        for s in layers[-1]:
            for _, outs in table(s):
                for _, nxt, _ in outs:
                    seen.setdefault(nxt, None)
        layers.append(list(seen))
        total += len(seen)
        if total > limit:
            raise CapExceeded(f"more than {limit} (round, state) pairs")

    value: dict[str, Fraction] = {}
    policy = {}
    for t in range(n - 1, -1, -1):
        new = {}
        for s in layers[t]:
            best = None
            for o, outs in table(s):
                v = sum((q * (u + value.get(nxt, 0)) for u, nxt, q in outs), Fraction(0))
                if best is None or v > best[0]:
                    best = (v, o)
            new[s] = best[0]
            policy[(t, s)] = best[1]
        value = new
    on_path = on_path_value(machine, game, n)[i]
    return DeviationReport(i, on_path, value[machine.initial], policy)


@dataclass(frozen=True)
class NeCheck:
    ok: bool
    reports: tuple[DeviationReport, ...]

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"is_repeated_ne": self.ok, "reports": [r.to_json() for r in self.reports]}


def is_repeated_ne(machine: StrategyMachine, game: Game, n: int) -> NeCheck:
    reports = tuple(best_deviation_value(machine, game, n, i) for i in game.players)
    return NeCheck(not any(r.profitable for r in reports), reports)


# -- punishment values ----------------------------------------------------------

PURE, MIXED, T_PURE = "pure", "mixed", "t_pure"


@dataclass(frozen=True)
class PunishmentValue:
    lower: Fraction
    value: Fraction

    @property
    def exact(self) -> bool:
        return self.lower == self.value


def stage_punishment(game: Game, i: int, mode: str, subset=frozenset()) -> MinmaxWitness:
    if mode == PURE:
        return pure_minmax(game, i)
    if mode == MIXED:
        return mixed_minmax(game, i)
    if mode == T_PURE:
        return t_pure_minmax(game, i, frozenset(subset))
    raise ValueError(f"unknown punishment mode {mode!r}")


def _shift(game: Game, i: int, amount: Fraction) -> Game:
    rows = tuple(
        tuple(v + amount if j == i else v for j, v in enumerate(row)) for row in game.table
    )
    return Game(game.action_counts, rows)


def worst_punishment_value(game: Game, i: int, n: int, mode: str = PURE, subset=frozenset()) -> PunishmentValue:
    """Backward induction over n rounds of history-dependent punishment.

    Each level solves the stage punishment problem on payoffs shifted by the
    continuation value; the result is compared against n times the stage value
    in the tests rather than assumed.
    """
    if n < 0:
        raise ValueError("horizon must be nonnegative")
    lower = value = Fraction(0)
    for _ in range(n):
        # the continuation is the same from every history, so one shift per level
        w = stage_punishment(_shift(game, i, value), i, mode, subset)
        lower_w = stage_punishment(_shift(game, i, lower), i, mode, subset)
        value, lower = w.value, lower_w.lower
    return PunishmentValue(lower, value)


# -- stage-level searches -------------------------------------------------------


def strict_ir_ne_exists(game: Game) -> NeCertificate | None:
    """A stage NE paying some player strictly above their minmax, trying players in order."""
    incomplete = None
    for i in game.players:
        try:
            cert = strict_ir_ne(game, i)
        except IncompleteSearch as exc:
            incomplete = exc
            continue
        if cert is not None:
            return cert
    if incomplete is not None:
        raise incomplete
    return None


def pure_repeated_ne_exists(game: Game, n: int) -> bool:
    """Does G^n have a Nash equilibrium in which every player is pure?

    A pure on-path sequence is an equilibrium iff no player gains by deviating
    at round t and then facing pure minmax punishment for the remaining rounds.
    Suffix payoff vectors are propagated backwards.
    """
    v = [pure_minmax(game, j).value for j in game.players]
    best_reply = {}
    for s in game.profiles:
        best_reply[s] = tuple(
            max(game.payoff(s[:j] + (a,) + s[j + 1:], j) for a in range(game.action_counts[j]))
            for j in game.players
        )
    suffixes = {tuple(Fraction(0) for _ in game.players)}
    for t in range(n, 0, -1):
        remaining = n - t
        new = set()
        for s in game.profiles:
            u = game.u(s)
            for w in suffixes:
                total = tuple(a + b for a, b in zip(u, w))
                if all(total[j] >= best_reply[s][j] + remaining * v[j] for j in game.players):
                    new.add(total)
        suffixes = new
        if not suffixes:
            return False
    return True
