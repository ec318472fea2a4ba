import json
from fractions import Fraction as F

import pytest

from repent.game import MixedProfile
from repent.machine import (
    OBSERVABLE,
    OFF,
    ON,
    STANDARD,
    Outcome,
    State,
    StrategyMachine,
    effective_entropy,
    entropy_report,
    on_path_value,
    repeat_machine,
    simulate,
    total_entropy,
)
from repent.sampler import RandomSource, TapeSource
from repent.schedule import tail_schedule
from repent.values import SupportedProfile

H = F(1, 2)


def uniform(game):
    return MixedProfile.from_dists([[H, H], [H, H]])


def cycle_machine(game, profiles):
    names = [f"c{t}" for t in range(len(profiles))]
    states = {
        names[t]: State(MixedProfile.pure(game, s), names[(t + 1) % len(names)])
        for t, s in enumerate(profiles)
    }
    return StrategyMachine(STANDARD, states, names[0])


def test_validation(mp):
    with pytest.raises(ValueError):
        StrategyMachine(STANDARD, {"a": State(uniform(mp), "b")}, "a")
    with pytest.raises(ValueError):
        StrategyMachine("bogus", {"a": State(uniform(mp), "a")}, "a")
    with pytest.raises(ValueError):
        StrategyMachine(STANDARD, {"a": State(uniform(mp), "a")}, "z")


def test_routing_by_deviator_set(mp):
    pure = MixedProfile.pure(mp, (0, 0))
    states = {
        "s": State(pure, "s", {0: "p0", 1: "p1"}, multi="m"),
        "p0": State(pure, "p0"), "p1": State(pure, "p1"), "m": State(pure, "m"),
    }
    m = StrategyMachine(STANDARD, states, "s")
    assert m.next_state("s", Outcome((0, 0))) == "s"
    assert m.next_state("s", Outcome((1, 0))) == "p0"
    assert m.next_state("s", Outcome((0, 1))) == "p1"
    assert m.next_state("s", Outcome((1, 1))) == "m"


def test_observable_markers(mp):
    states = {"s": State(uniform(mp), "s", {0: "p"}), "p": State(uniform(mp), "p")}
    m = StrategyMachine(OBSERVABLE, states, "s")
    assert m.next_state("s", Outcome((1, 0), (ON, ON))) == "s"
    assert m.next_state("s", Outcome((1, 0), (OFF, ON))) == "p"


def test_entropy_examples(mp, pd):
    dd = repeat_machine(MixedProfile.pure(pd, (1, 1)))
    assert total_entropy(dd, pd, 6, 0).bits == 0
    assert total_entropy(cycle_machine(mp, [(0, 0), (1, 0)]), mp, 5, 0).bits == 0
    u = repeat_machine(uniform(mp))
    for n in (1, 5, 9):
        assert abs(total_entropy(u, mp, n, 0).bits - n) < 1e-9
        assert abs(effective_entropy(u, mp, n, 1).bits - n) < 1e-9


def test_off_path_mixing_only_counts_in_total(mp):
    pure = MixedProfile.pure(mp, (0, 0))
    states = {"s": State(pure, "s", {1: "x"}), "x": State(uniform(mp), "x")}
    m = StrategyMachine(STANDARD, states, "s")
    assert effective_entropy(m, mp, 4, 0).bits == 0
    res = total_entropy(m, mp, 4, 0)
    assert abs(res.bits - 3) < 1e-9
    assert res.path == ("s", "x", "x", "x")
    assert m.next_state("s", res.witness[0]) == "x"


def test_total_entropy_monotone_and_dominates(mp):
    pure = MixedProfile.pure(mp, (0, 0))
    states = {
        "a": State(uniform(mp), "b", {0: "x"}),
        "b": State(pure, "a", {1: "x"}),
        "x": State(MixedProfile.from_dists([[F(1, 4), F(3, 4)], [1, 0]]), "x"),
    }
    m = StrategyMachine(STANDARD, states, "a")
    prev = -1
    for n in range(1, 9):
        for i in mp.players:
            t, e = total_entropy(m, mp, n, i).bits, effective_entropy(m, mp, n, i).bits
            assert e <= t + 1e-9
        t0 = total_entropy(m, mp, n, 0).bits
        assert t0 >= prev - 1e-9
        prev = t0


def test_on_path_value_examples(mp, pd):
    assert on_path_value(repeat_machine(MixedProfile.pure(pd, (1, 1))), pd, 5) == (1, 1)
    assert on_path_value(repeat_machine(uniform(mp)), mp, 3) == (F(3, 2), F(3, 2))


def test_on_path_value_matches_schedule_sum(pd):
    sp = SupportedProfile.of(pd, [(0, 0), (0, 1), (1, 1)], [F(1, 2), F(1, 3), F(1, 6)])
    n = 25
    sched = tail_schedule(pd, sp, n)
    m = cycle_machine(pd, list(sched.profiles))
    direct = tuple(sum(pd.payoff(s, i) for s in sched.profiles) for i in pd.players)
    assert on_path_value(m, pd, n) == direct
    assert all(abs(d - n * p) <= len(sp.profiles) for d, p in zip(direct, sp.value))


def test_simulate(mp, pd):
    res = simulate(repeat_machine(MixedProfile.pure(pd, (0, 0))), pd, 4, TapeSource(""))
    assert res.bits == (0, 0) and res.history == ((0, 0),) * 4
    res = simulate(repeat_machine(uniform(mp)), mp, 1, TapeSource("0" * 20))
    assert res.history == ((0, 0),) and res.bits == (10, 10)


def test_knuth_yao_bits_per_round(mp):
    runs, n = 2000, 5
    m = repeat_machine(uniform(mp))
    src = RandomSource(7)
    total = sum(simulate(m, mp, n, src, "ky").bits[0] for _ in range(runs))
    avg = total / (runs * n)
    assert 1 <= avg < 3


def test_json_round_trip(mp):
    pure = MixedProfile.pure(mp, (0, 0))
    states = {"s": State(pure, "s", {0: "x", 1: "y"}, allowed=((0,), (0, 1))),
              "x": State(uniform(mp), "x"), "y": State(pure, "y"), "absorb": State(pure, "absorb")}
    m = StrategyMachine(STANDARD, states, "s", 7)
    again = StrategyMachine.from_json(json.loads(json.dumps(m.to_json())))
    assert again == m


def test_entropy_report(mp):
    rep = entropy_report(repeat_machine(uniform(mp)), mp, 3)
    assert rep.to_json()["total"] == ["3", "3"]
