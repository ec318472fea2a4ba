import itertools
from fractions import Fraction as F

import pytest

from repent.config import CapExceeded, parse_caps
from repent.corpus import stag_hunt
from repent.game import MixedProfile, normalize
from repent.machine import STANDARD, Outcome, State, StrategyMachine, repeat_machine
from repent.schedule import tail_schedule
from repent.values import SupportedProfile, mixed_minmax, pure_minmax
from repent.verify import (
    MIXED,
    PURE,
    T_PURE,
    best_deviation_value,
    is_repeated_ne,
    pure_repeated_ne_exists,
    stage_punishment,
    strict_ir_ne_exists,
    worst_punishment_value,
)

H = F(1, 2)


def test_pd_repeat_ne(pd):
    m = repeat_machine(MixedProfile.pure(pd, (1, 1)))
    rep = best_deviation_value(m, pd, 5, 0)
    assert rep.best_deviation_value == rep.on_path_value == 1
    assert not rep.profitable
    assert is_repeated_ne(m, pd, 5)


def test_uniform_mp(mp):
    m = repeat_machine(MixedProfile.from_dists([[H, H], [H, H]]))
    rep = best_deviation_value(m, mp, 3, 0)
    assert rep.best_deviation_value == rep.on_path_value == F(3, 2)
    assert is_repeated_ne(m, mp, 3)


def test_pure_cycle_is_exploited(mp):
    states = {"a": State(MixedProfile.pure(mp, (0, 0)), "b"), "b": State(MixedProfile.pure(mp, (1, 0)), "a")}
    m = StrategyMachine(STANDARD, states, "a")
    rep = best_deviation_value(m, mp, 2, 1)
    assert rep.best_deviation_value == 2 and rep.on_path_value == 1
    assert rep.profitable and rep.gain == 1
    assert not is_repeated_ne(m, mp, 2)


def test_schedule_without_punishment_is_not_ne(pd):
    sp = SupportedProfile.of(pd, [(0, 0)], [1])
    sched = tail_schedule(pd, sp, 4)
    names = [f"r{t}" for t in range(4)] + ["end"]
    states = {names[t]: State(MixedProfile.pure(pd, s), names[t + 1]) for t, s in enumerate(sched.profiles)}
    states["end"] = State(MixedProfile.pure(pd, (1, 1)), "end")
    assert not is_repeated_ne(StrategyMachine(STANDARD, states, names[0]), pd, 4)


def brute_force_best_deviation(machine, game, n, i):
    """Enumerate every pure history-dependent deviation for tiny pure machines."""
    best = None
    histories = [()]
    for t in range(n - 1):
        histories += [h + (s,) for h in histories if len(h) == t for s in game.profiles]
    histories = [h for h in histories if len(h) < n]
    for choice in itertools.product(range(game.action_counts[i]), repeat=len(histories)):
        policy = dict(zip(histories, choice))
        state, h, total = machine.initial, (), F(0)
        for _ in range(n):
            st = machine.states[state]
            actions = list(st.profile.as_pure())
            actions[i] = policy[h]
            s = tuple(actions)
            total += game.payoff(s, i)
            state = machine.next_state(state, Outcome(s))
            h = h + (s,)
        best = total if best is None else max(best, total)
    return best


def test_mdp_matches_brute_force(pd, mp):
    grim = {
        "c": State(MixedProfile.pure(pd, (0, 0)), "c", {0: "d", 1: "d"}, multi="d"),
        "d": State(MixedProfile.pure(pd, (1, 1)), "d"),
    }
    m = StrategyMachine(STANDARD, grim, "c")
    for n in (1, 2):
        for i in pd.players:
            assert best_deviation_value(m, pd, n, i).best_deviation_value == brute_force_best_deviation(m, pd, n, i)


def test_deviation_never_below_on_path(corpus_game):
    _, g = corpus_game
    if g.player_count != 2:
        return
    m = repeat_machine(MixedProfile.pure(g, g.profiles[0]))
    for i in g.players:
        rep = best_deviation_value(m, g, 3, i)
        assert rep.best_deviation_value >= rep.on_path_value


def test_worst_punishment_examples(mp):
    assert worst_punishment_value(mp, 0, 4, PURE).value == 4
    assert worst_punishment_value(mp, 0, 4, MIXED).value == 2
    assert worst_punishment_value(mp, 0, 1, T_PURE, {1}).value == 1


def test_worst_punishment_is_linear_on_corpus(corpus_game):
    _, g = corpus_game
    for i in g.players:
        for n in range(7):
            assert worst_punishment_value(g, i, n, PURE).value == n * pure_minmax(g, i).value
            if g.player_count == 2:
                assert worst_punishment_value(g, i, n, MIXED).value == n * mixed_minmax(g, i).value


def test_stage_punishment_modes(mp):
    assert stage_punishment(mp, 0, PURE).value == 1
    with pytest.raises(ValueError):
        stage_punishment(mp, 0, "nope")


def test_strict_ir_ne_exists(mp, pd):
    assert strict_ir_ne_exists(mp) is None
    assert strict_ir_ne_exists(pd) is None
    cert = strict_ir_ne_exists(normalize(stag_hunt()))
    assert cert is not None and any(cert.strict)


def test_pure_repeated_ne(mp, pd):
    assert not pure_repeated_ne_exists(mp, 2)
    assert pure_repeated_ne_exists(pd, 3)


def test_state_cap(monkeypatch, mp):
    monkeypatch.setenv("REPENT_CAPS", "mdp_states=3")
    states = {f"s{t}": State(MixedProfile.pure(mp, (0, 0)), f"s{t + 1}") for t in range(5)}
    states["s5"] = State(MixedProfile.pure(mp, (0, 0)), "s5")
    with pytest.raises(CapExceeded):
        best_deviation_value(StrategyMachine(STANDARD, states, "s0"), mp, 5, 0)


def test_parse_caps():
    c = parse_caps("k0=12,max_players=3")
    assert (c.k0, c.max_players) == (12, 3)
    with pytest.raises(ValueError):
        parse_caps("bogus=1")
