"""Finite-state strategy machines for the repeated game, with entropy and payoff DPs.

A machine state prescribes a stage profile and routes the observed outcome to
a successor. Routing depends only on *which* players deviated:

* nobody counted as deviating: ``next``;
* exactly one counted deviator j: ``punish[j]``;
* two or more: ``multi``.

In the STANDARD model player j deviates when their action leaves
``allowed[j]`` (default: the support of j's prescription). In the OBSERVABLE
model each player's realized distribution is revealed; the outcome carries
one marker per player, ``ON`` (played the prescription) or ``OFF`` (anything
else), and OFF players deviate. Players absent from ``punish`` are never
counted. Histories are never materialized.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .config import CapExceeded, caps
from .game import (
    Game,
    MixedProfile,
    Profile,
    format_fraction,
    profile_from_json,
    profile_to_json,
)
from .sampler import PrecisionOracle, sample, shannon_entropy

STANDARD = "standard"
OBSERVABLE = "observable"
ON, OFF = "on", "off"
ABSORB = "absorb"


@dataclass(frozen=True)
class State:
    profile: MixedProfile
    next: str
    punish: Mapping[int, str] = field(default_factory=dict)
    allowed: tuple[tuple[int, ...], ...] | None = None
    multi: str = ABSORB

    def allowed_actions(self, j: int) -> tuple[int, ...]:
        if self.allowed is None:
            return self.profile.support(j)
        return self.allowed[j]


@dataclass(frozen=True)
class Outcome:
    actions: Profile
    markers: tuple[str, ...] | None = None  # OBSERVABLE model only


@dataclass(frozen=True)
class StrategyMachine:
    model: str
    states: Mapping[str, State]
    initial: str
    horizon_hint: int | None = None
    certificate: Mapping | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.model not in (STANDARD, OBSERVABLE):
            raise ValueError(f"unknown model {self.model!r}")
        if self.initial not in self.states:
            raise ValueError("initial state is not defined")
        for name, st in self.states.items():
            targets = [st.next, *st.punish.values()]
            if len(st.punish) >= 2:
                targets.append(st.multi)
            missing = [t for t in targets if t not in self.states]
            if missing:
                raise ValueError(f"state {name!r} points to undefined states {missing}")

    def check_game(self, game: Game) -> None:
        for name, st in self.states.items():
            if [len(d) for d in st.profile.dists] != list(game.action_counts):
                raise ValueError(f"state {name!r} does not match the game's action counts")

    # -- transitions ---------------------------------------------------------

    def deviators(self, state: str, outcome: Outcome) -> tuple[int, ...]:
        st = self.states[state]
        if self.model == STANDARD:
            return tuple(
                j for j in st.punish
                if outcome.actions[j] not in st.allowed_actions(j)
            )
        markers = outcome.markers
        for j, mark in enumerate(markers):
            if mark == ON and outcome.actions[j] not in st.profile.support(j):
                raise ValueError("an ON marker requires an action inside the prescribed support")
        return tuple(j for j in st.punish if markers[j] == OFF)

    def next_state(self, state: str, outcome: Outcome) -> str:
        st = self.states[state]
        dev = self.deviators(state, outcome)
        if not dev:
            return st.next
        if len(dev) == 1:
            return st.punish[dev[0]]
        return st.multi

    def _deviable(self, state: str) -> list[int]:
        """Counted players that have some deviating outcome available."""
        st = self.states[state]
        if self.model == OBSERVABLE:
            return sorted(st.punish)
        return sorted(
            j for j in st.punish
            if len(st.allowed_actions(j)) < len(st.profile.dists[j])
        )

    def representative_outcomes(self, state: str) -> list[Outcome]:
        """One outcome per reachable deviator class (none, each single, one pair).

        Routing depends only on the deviator set, so these reach every successor.
        """
        st = self.states[state]
        m = len(st.profile.dists)
        if self.model == OBSERVABLE:
            base = [st.profile.support(j)[0] for j in range(m)]
        else:
            base = [st.allowed_actions(j)[0] for j in range(m)]
        deviable = self._deviable(state)

        def make(devs):
            actions = list(base)
            markers = [ON] * m
            for j in devs:
                if self.model == STANDARD:
                    allowed = st.allowed_actions(j)
                    actions[j] = next(a for a in range(len(st.profile.dists[j])) if a not in allowed)
                else:
                    markers[j] = OFF
            return Outcome(tuple(actions), tuple(markers) if self.model == OBSERVABLE else None)

        out = [make(())]
        out.extend(make((j,)) for j in deviable)
        if len(deviable) >= 2:
            out.append(make(tuple(deviable[:2])))
        return out

    def on_path_outcomes(self, state: str):
        """(outcome, probability) over the product support, everyone conforming."""
        st = self.states[state]
        m = len(st.profile.dists)
        for actions, prob in st.profile.outcomes():
            yield Outcome(actions, (ON,) * m if self.model == OBSERVABLE else None), prob

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        states = {}
        for name, st in self.states.items():
            entry = {"profile": profile_to_json(st.profile), "next": st.next}
            if st.punish:
                entry["punish"] = {str(j): t for j, t in sorted(st.punish.items())}
            if st.allowed is not None:
                entry["allowed"] = [list(a) for a in st.allowed]
            if st.multi != ABSORB:
                entry["multi"] = st.multi
            states[name] = entry
        data = {"model": self.model, "initial": self.initial, "states": states}
        if self.horizon_hint is not None:
            data["horizon"] = self.horizon_hint
        if self.certificate is not None:
            data["certificate"] = self.certificate
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> StrategyMachine:
        states = {}
        for name, entry in data["states"].items():
            states[name] = State(
                profile=profile_from_json(entry["profile"]),
                next=entry["next"],
                punish={int(j): t for j, t in entry.get("punish", {}).items()},
                allowed=tuple(tuple(a) for a in entry["allowed"]) if "allowed" in entry else None,
                multi=entry.get("multi", ABSORB),
            )
        return cls(data["model"], states, data["initial"], data.get("horizon"), data.get("certificate"))


def repeat_machine(profile: MixedProfile, model: str = STANDARD) -> StrategyMachine:
    """Play ``profile`` every round regardless of history."""
    return StrategyMachine(model, {"s": State(profile, "s")}, "s")


# -- reachability -------------------------------------------------------------


def _reachable(machine: StrategyMachine, n: int, successors) -> list[list[str]]:
    layers = [[machine.initial]]
    total = 1
    limit = caps().mdp_states
    for _ in range(n - 1):
        seen: dict[str, None] = {}
        for s in layers[-1]:
            for t in successors(s):
                seen.setdefault(t, None)
        layers.append(list(seen))
        total += len(seen)
        if total > limit:
            raise CapExceeded(f"more than {limit} (round, state) pairs")
    return layers


def _all_successors(machine):
    cache = {}

    def succ(s):
        if s not in cache:
            cache[s] = {machine.next_state(s, o): o for o in machine.representative_outcomes(s)}
        return cache[s]
    return succ


def _on_path_successors(machine):
    cache = {}

    def succ(s):
        if s not in cache:
            found = {}
            for o, _ in machine.on_path_outcomes(s):
                found.setdefault(machine.next_state(s, o), o)
            cache[s] = found
        return cache[s]
    return succ


# -- entropy ------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyResult:
    bits: float
    path: tuple[str, ...]
    witness: tuple[Outcome, ...]


def _entropy_dp(machine, n, i, succ) -> EntropyResult:
    if n < 1:
        raise ValueError("horizon must be at least 1")
    layers = _reachable(machine, n, succ)
    h_cache = {}

    def h(s):
        if s not in h_cache:
            h_cache[s] = shannon_entropy(machine.states[s].profile.dists[i])
        return h_cache[s]

    value = {s: (h(s), None) for s in layers[-1]}
    best_next = [{} for _ in range(n)]
    for t in range(n - 2, -1, -1):
        new = {}
        for s in layers[t]:
            best = None
            for nxt, outcome in succ(s).items():
                v = value[nxt][0]
                if best is None or v > best[0] + 1e-9:
                    best = (v, nxt, outcome)
            new[s] = (h(s) + best[0], None)
            best_next[t][s] = (best[1], best[2])
        value = new
    path = [machine.initial]
    witness = []
    for t in range(n - 1):
        nxt, outcome = best_next[t][path[-1]]
        path.append(nxt)
        witness.append(outcome)
    return EntropyResult(value[machine.initial][0], tuple(path), tuple(witness))


def total_entropy(machine: StrategyMachine, game: Game, n: int, i: int) -> EntropyResult:
    """Max over every history of the summed Shannon entropy of i's prescriptions."""
    machine.check_game(game)
    return _entropy_dp(machine, n, i, _all_successors(machine))


def effective_entropy(machine: StrategyMachine, game: Game, n: int, i: int) -> EntropyResult:
    """Same maximum restricted to histories with positive on-path probability."""
    machine.check_game(game)
    return _entropy_dp(machine, n, i, _on_path_successors(machine))


@dataclass(frozen=True)
class EntropyReport:
    horizon: int
    total: tuple[float, ...]
    effective: tuple[float, ...]
    witness_paths: tuple[tuple[str, ...], ...]

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "total": [format_entropy(v) for v in self.total],
            "effective": [format_entropy(v) for v in self.effective],
            "witness_paths": [list(p) for p in self.witness_paths],
        }


def format_entropy(value: float) -> str:
    return f"{value:.12g}"


def entropy_report(machine: StrategyMachine, game: Game, n: int) -> EntropyReport:
    totals = [total_entropy(machine, game, n, i) for i in game.players]
    effective = [effective_entropy(machine, game, n, i) for i in game.players]
    return EntropyReport(
        n,
        tuple(r.bits for r in totals),
        tuple(r.bits for r in effective),
        tuple(r.path for r in totals),
    )


# -- payoffs ------------------------------------------------------------------


def on_path_value(machine: StrategyMachine, game: Game, n: int) -> tuple[Fraction, ...]:
    """Expected total payoff vector over n rounds of conforming play."""
    machine.check_game(game)
    dist = {machine.initial: Fraction(1)}
    totals = [Fraction(0)] * game.player_count
    for _ in range(n):
        new: dict[str, Fraction] = {}
        for s, p in dist.items():
            for outcome, q in machine.on_path_outcomes(s):
                row = game.u(outcome.actions)
                for i in game.players:
                    totals[i] += p * q * row[i]
                nxt = machine.next_state(s, outcome)
                new[nxt] = new.get(nxt, Fraction(0)) + p * q
        dist = new
    return tuple(totals)


# -- simulation ---------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    history: tuple[Profile, ...]
    states: tuple[str, ...]
    payoffs: tuple[Fraction, ...]
    bits: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "history": [list(s) for s in self.history],
            "states": list(self.states),
            "payoffs": [format_fraction(v) for v in self.payoffs],
            "bits": list(self.bits),
        }


def simulate(machine: StrategyMachine, game: Game, n: int, source, algo: str = "inversion") -> SimulationResult:
    """Play n conforming rounds, sampling each mixed prescription exactly."""
    machine.check_game(game)
    state = machine.initial
    history, visited = [], []
    totals = [Fraction(0)] * game.player_count
    bits = [0] * game.player_count
    for _ in range(n):
        visited.append(state)
        st = machine.states[state]
        actions = []
        for j in game.players:
            support = st.profile.support(j)
            if len(support) == 1:
                actions.append(support[0])
                continue
            oracle = PrecisionOracle(tuple(st.profile.dists[j][a] for a in support))
            k, used = sample(oracle, source, algo)
            actions.append(support[k])
            bits[j] += used
        s = tuple(actions)
        history.append(s)
        for i, v in enumerate(game.u(s)):
            totals[i] += v
        markers = (ON,) * game.player_count if machine.model == OBSERVABLE else None
        state = machine.next_state(state, Outcome(s, markers))
    return SimulationResult(tuple(history), tuple(visited), tuple(totals), tuple(bits))
