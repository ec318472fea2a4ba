from dataclasses import replace
from fractions import Fraction

import pytest

from repent.builders import (
    EFFECTIVE,
    TWO_PLAYER_CASE1,
    BuildCertificate,
    HorizonTooShort,
    InvalidCertificate,
    Reward,
    build,
    concatenation_machine,
    minimum_horizon,
    phase2_length,
    punish_lengths,
    repeat_ne_certificate,
    validate,
)
from repent.characterize import (
    decide_effective,
    decide_general,
    decide_two_player,
    two_player_construction,
)
from repent.corpus import battle_of_sexes, corpus, reward_two_blocks
from repent.game import Game, MixedProfile, normalize
from repent.machine import ABSORB, StrategyMachine, entropy_report, on_path_value
from repent.values import SupportedProfile, strict_ir_ne
from repent.verify import is_repeated_ne

CONSTANT_GAMES = {
    name: normalize(g) for name, g in corpus().items() if decide_general(normalize(g)).certificate
}


def _certificate(game):
    return decide_general(game).certificate


@pytest.mark.parametrize(
    "deltas, s_count, expected",
    [
        ([Fraction(1, 2)], 4, [10]),
        ([1, 1], 4, [5, 10]),
        ([Fraction(1000)], 4, [1]),
        ([Fraction(1, 3), Fraction(1, 2)], 1, [6, 16]),
    ],
)
def test_punish_lengths(deltas, s_count, expected):
    assert punish_lengths(deltas, s_count) == expected


@pytest.mark.parametrize("bad", [0, Fraction(-1, 2)])
def test_punish_lengths_rejects_nonpositive_margin(bad):
    with pytest.raises(InvalidCertificate):
        punish_lengths([1, bad], 2)


def test_repeat_ne_machine_for_pd(pd):
    cert = repeat_ne_certificate(MixedProfile.pure(pd, (1, 1)))
    m = build(pd, cert, 7)
    assert len(m.states) == 1
    assert on_path_value(m, pd, 7) == (Fraction(7, 5), Fraction(7, 5))
    assert is_repeated_ne(m, pd, 7)
    rep = entropy_report(m, pd, 7)
    assert rep.total == rep.effective == (0.0, 0.0)


def test_forged_certificate_for_matching_pennies_is_rejected(mp):
    support = SupportedProfile.of(mp, [(0, 0), (0, 1)], [Fraction(1, 2)] * 2)
    forged = BuildCertificate(
        TWO_PLAYER_CASE1, support, (Reward(1, MixedProfile.pure(mp, (0, 1))),),
        deltas=(Fraction(1, 2),), ignored=(0,),
    )
    with pytest.raises(InvalidCertificate):
        build(mp, forged, 20)


def test_repeat_ne_rejects_non_equilibrium(mp):
    with pytest.raises(InvalidCertificate):
        validate(mp, repeat_ne_certificate(MixedProfile.pure(mp, (0, 0))))


@pytest.mark.parametrize("name", sorted(CONSTANT_GAMES))
def test_corpus_certificates_verify_at_minimum_horizon(name):
    game = CONSTANT_GAMES[name]
    cert = _certificate(game)
    n = minimum_horizon(game, cert)
    assert is_repeated_ne(build(game, cert, n), game, n)


@pytest.mark.parametrize("name", sorted(CONSTANT_GAMES))
def test_horizon_below_minimum_raises(name):
    game = CONSTANT_GAMES[name]
    cert = _certificate(game)
    n = minimum_horizon(game, cert)
    with pytest.raises(HorizonTooShort) as err:
        build(game, cert, n - 1)
    assert err.value.minimum == n


def test_repeat_ne_accepts_any_positive_horizon(pd):
    cert = repeat_ne_certificate(MixedProfile.pure(pd, (1, 1)))
    assert build(pd, cert, 1).horizon_hint == 1
    with pytest.raises(HorizonTooShort):
        build(pd, cert, 0)


def test_dropping_phase1_punishments_breaks_equilibrium():
    game = normalize(reward_two_blocks())
    cert = decide_two_player(game).certificate
    n = minimum_horizon(game, cert) + 3
    m = build(game, cert, n)
    assert is_repeated_ne(m, game, n)
    states = {
        name: replace(st, punish={}) if name.startswith("p1.") and ".x" not in name else st
        for name, st in m.states.items()
    }
    tampered = StrategyMachine(m.model, states, m.initial, n)
    check = is_repeated_ne(tampered, game, n)
    assert not check
    assert any(r.profitable and r.gain > 0 for r in check.reports)


@pytest.mark.parametrize("name", sorted(CONSTANT_GAMES))
def test_certificate_json_round_trip(name):
    game = CONSTANT_GAMES[name]
    cert = _certificate(game)
    again = BuildCertificate.from_json(cert.to_json(), game)
    assert again == cert
    assert phase2_length(game, again) == phase2_length(game, cert)


def test_certificate_json_rejects_wrong_value():
    game = normalize(reward_two_blocks())
    data = decide_two_player(game).certificate.to_json()
    data["support"]["value"] = ["0", "0"]
    with pytest.raises(InvalidCertificate):
        BuildCertificate.from_json(data, game)


def test_unknown_variant_rejected():
    with pytest.raises(InvalidCertificate):
        BuildCertificate("NOPE")


@pytest.mark.parametrize("name", sorted(CONSTANT_GAMES))
def test_phase2_concatenation_is_stage_ne_sequence(name):
    game = CONSTANT_GAMES[name]
    cert = _certificate(game)
    if cert.variant != "GENERAL" or not cert.rewards:
        pytest.skip("no phase-2 stage equilibria to concatenate")
    profiles = [r.profile for r in cert.rewards]
    assert is_repeated_ne(concatenation_machine(game, profiles), game, len(profiles))


@pytest.mark.parametrize("name", sorted(CONSTANT_GAMES))
def test_phase1_states_are_pure_on_path(name):
    game = CONSTANT_GAMES[name]
    cert = _certificate(game)
    m = build(game, cert, minimum_horizon(game, cert) + 2)
    for state_name, st in m.states.items():
        if state_name.startswith("p1.") and ".x" not in state_name:
            assert all(len(st.profile.support(j)) == 1 for j in game.players)


def test_effective_variant_punishes_with_mixed_strategies():
    game = normalize(reward_two_blocks())
    cert = decide_effective(game).certificate
    assert cert.variant == EFFECTIVE
    m = build(game, cert, minimum_horizon(game, cert) + 1)
    punishers = [st for name, st in m.states.items() if name.startswith("p1.") and ".x" in name]
    assert any(any(len(st.profile.support(j)) > 1 for j in game.players) for st in punishers)


def test_two_player_construction_on_pure_ne_games(pd):
    assert two_player_construction(pd) is None  # stage NE pays exactly the minmax
    game = normalize(battle_of_sexes())
    cert = two_player_construction(game)
    assert cert.variant.startswith("TWO_PLAYER")
    n = minimum_horizon(game, cert)
    assert is_repeated_ne(build(game, cert, n), game, n)


def test_case1_certificate_on_grid_game():
    q = [[Fraction(x, 4) for x in row] for row in ([2, 2], [2, 2])]
    b = [[Fraction(x, 4) for x in row] for row in ([0, 2], [4, 0])]
    game = normalize(Game.bimatrix(q, b))
    cert = two_player_construction(game)
    assert cert.variant == TWO_PLAYER_CASE1
    assert strict_ir_ne(game, cert.rewards[0].player) is not None
    n = minimum_horizon(game, cert)
    totals = set()
    for k in range(n, n + 4):
        m = build(game, cert, k)
        assert is_repeated_ne(m, game, k)
        assert ABSORB in m.states
        totals.add(round(entropy_report(m, game, k).total[1], 9))
    assert len(totals) == 1
