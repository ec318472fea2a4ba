"""Acceptance criteria 1-10. Each test prints one PASS/FAIL line and checks its time budget."""

import random
import time
from fractions import Fraction

import pytest

from repent.builders import build, minimum_horizon, phase2_length, repeat_ne_certificate
from repent.characterize import (
    CONSTANT,
    EXACT,
    LINEAR,
    decide_effective,
    decide_general,
    decide_omega_two,
    decide_two_player,
    two_player_construction,
)
from repent.corpus import (
    CONSTANT_SUM,
    corpus,
    grid_2x2_family,
    grid_2x2_game,
    matching_pennies,
    prisoners_dilemma,
)
from repent.game import Game, MixedProfile, normalize
from repent.machine import entropy_report
from repent.sampler import (
    PrecisionOracle,
    enumerate_termination,
    knuth_yao_expected_bits,
    shannon_entropy,
)
from repent.schedule import (
    tail_bound_violations,
    tail_schedule,
    xa_sequence,
    xa_violations,
)
from repent.values import SupportedProfile, mixed_minmax, pure_minmax, pure_ne
from repent.verify import (
    MIXED,
    PURE,
    is_repeated_ne,
    pure_repeated_ne_exists,
    worst_punishment_value,
)

GRID = tuple(Fraction(k, 4) for k in range(5))


@pytest.fixture
def outcome(capsys):
    """Print one PASS/FAIL line (bypassing capture) and fail the test on FAIL."""

    def emit(k, ok, detail, elapsed=None, budget=None):
        if budget is not None and elapsed > budget:
            ok = False
            detail += f"; took {elapsed:.1f}s, budget {budget}s"
        elif elapsed is not None:
            detail += f" ({elapsed:.2f}s)"
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
        assert ok, detail

    return emit


# -- shared 2x2 family ------------------------------------------------------------


def _game(v):
    return normalize(grid_2x2_game(v))


@pytest.fixture(scope="module")
def family():
    return grid_2x2_family()


@pytest.fixture(scope="module")
def zero_one(family):
    """Verdicts for criterion 9, reused by criterion 10."""
    start = time.perf_counter()
    rows = []
    for v in family:
        g = _game(v)
        two = decide_two_player(g)
        general = decide_general(g)
        effective = decide_effective(g).result if general.result == CONSTANT else None
        rows.append((v, two.result, two.exactness, general.result, effective))
    return rows, time.perf_counter() - start


# -- criteria -----------------------------------------------------------------------


def test_criterion_1_matching_pennies(outcome):
    start = time.perf_counter()
    mp = matching_pennies()
    verdict = decide_two_player(mp)
    omega = decide_omega_two(mp)
    ok = verdict.result == LINEAR and verdict.exactness == EXACT and bool(omega)
    outcome(1, ok, f"matching pennies {verdict.result}/{verdict.exactness}, omega_two={bool(omega)}",
            time.perf_counter() - start, 1)


def _pure_ne_games():
    games = {name: normalize(g) for name, g in corpus().items()}
    return {name: g for name, g in games.items() if pure_ne(g)}


def test_criterion_2_pure_ne_games(outcome):
    games = _pure_ne_games()
    assert "prisoners_dilemma" in games
    problems = []
    slowest = 0.0
    for name, g in games.items():
        start = time.perf_counter()
        result = decide_two_player(g).result if g.player_count == 2 else decide_general(g).result
        if result != CONSTANT:
            problems.append(f"{name} is {result}")
        cert = repeat_ne_certificate(MixedProfile.pure(g, pure_ne(g)[0]))
        for n in range(1, 11):
            m = build(g, cert, n)
            if not is_repeated_ne(m, g, n):
                problems.append(f"{name} fails the NE check at n={n}")
            rep = entropy_report(m, g, n)
            if any(x != 0 for x in rep.total + rep.effective):
                problems.append(f"{name} has nonzero entropy at n={n}")
        slowest = max(slowest, time.perf_counter() - start)
    if slowest >= 1:
        problems.append(f"slowest game took {slowest:.2f}s")
    assert normalize(prisoners_dilemma()) in games.values()
    outcome(2, not problems, "; ".join(problems) or
            f"{len(games)} pure-NE games CONSTANT, REPEAT_NE verified n=1..10, entropy 0 (max {slowest:.2f}s/game)")


def test_criterion_3_certificate_round_trip(outcome, family):
    start = time.perf_counter()
    # first matches in canonical order, capped in phase-2 length to keep the budget
    quota = {"TWO_PLAYER_CASE1": (16, 20), "TWO_PLAYER_CASE2": (8, 40)}
    by_case = {case: [] for case in quota}
    for v in family:
        g = _game(v)
        cert = two_player_construction(g)
        if cert is None:
            continue
        want, cap = quota[cert.variant]
        p2 = phase2_length(g, cert)
        if len(by_case[cert.variant]) < want and p2 <= cap:
            by_case[cert.variant].append((p2, cert.variant, v, g, cert))
        if all(len(by_case[c]) == quota[c][0] for c in quota):
            break
    chosen = [item for case in quota for item in by_case[case]]
    problems = []
    for p2, variant, v, g, cert in chosen:
        first = minimum_horizon(g, cert)
        totals = []
        for n in range(first, first + 7):
            m = build(g, cert, n)
            if not is_repeated_ne(m, g, n):
                problems.append(f"{v} fails at n={n}")
            totals.append(entropy_report(m, g, n).total)
        spread = max(abs(a - b) for t in totals for a, b in zip(t, totals[0]))
        if spread > 1e-9:
            problems.append(f"{v} total entropy varies by {spread}")
    ok = len(chosen) >= 20 and not problems
    cases = {k: len(x) for k, x in by_case.items()}
    lengths = sorted({item[0] for item in chosen})
    outcome(3, ok, "; ".join(problems[:5]) or
            f"{len(chosen)} grid games {cases}, phase-2 lengths {lengths}, verified for n in minimum..minimum+6 with constant total entropy",
            time.perf_counter() - start, 300)


def _random_rational(rng, r):
    den = rng.randint(r, 1000)
    cuts = sorted(rng.sample(range(1, den), r - 1))
    edges = [0, *cuts, den]
    return [Fraction(edges[k + 1] - edges[k], den) for k in range(r)]


def test_criterion_4_xa_invariants(outcome):
    start = time.perf_counter()
    rng = random.Random(4)
    bad = []
    for _ in range(1000):
        x = _random_rational(rng, rng.randint(1, 6))
        problems = xa_violations(xa_sequence(x, 10**4))
        if problems:
            bad.append((x, problems))
    outcome(4, not bad, f"{len(bad)} of 1000 sequences violate the invariants" if bad
            else "1000 random x (r <= 6), k_max = 10^4: sum, monotonicity and floor bounds hold",
            time.perf_counter() - start, 60)


def test_criterion_5_tail_bound(outcome):
    start = time.perf_counter()
    rng = random.Random(5)
    bad = 0
    for _ in range(1000):
        rows, cols = rng.randint(2, 3), rng.randint(2, 3)
        a = [[rng.choice(GRID) for _ in range(cols)] for _ in range(rows)]
        b = [[rng.choice(GRID) for _ in range(cols)] for _ in range(rows)]
        g = Game.bimatrix(a, b)
        r = rng.randint(1, min(6, len(g.profiles)))
        profiles = rng.sample(g.profiles, r)
        support = SupportedProfile.of(g, profiles, _random_rational(rng, r))
        try:
            schedule = tail_schedule(g, support, 1000)
        except RuntimeError:
            bad += 1
            continue
        if tail_bound_violations(g, schedule):
            bad += 1
    outcome(5, bad == 0, f"{bad} of 1000 supports violate the tail bound" if bad
            else "1000 random supports, n = 1000: every suffix average >= p - r/k exactly",
            time.perf_counter() - start, 60)


def _distributions():
    rng = random.Random(6)
    out = []
    for _ in range(100):
        n = rng.randint(1, 5)
        den = rng.randint(n, 64)
        if n == 1:
            out.append([Fraction(1)])
            continue
        cuts = sorted(rng.sample(range(1, den), n - 1))
        edges = [0, *cuts, den]
        out.append([Fraction(edges[k + 1] - edges[k], den) for k in range(n)])
    return out


def test_criterion_6_inversion_exactness(outcome):
    start = time.perf_counter()
    bad = []
    for p in _distributions():
        prof = enumerate_termination(PrecisionOracle(p), 24)
        n = len(p)
        if any(abs(m - q) > prof.unresolved for m, q in zip(prof.masses, p)):
            bad.append((p, "mass"))
        if any(u > Fraction(n * n, 2**k) for k, u in prof.unresolved_by_depth):
            bad.append((p, "tail"))
    outcome(6, not bad, f"failures: {bad[:3]}" if bad
            else "100 distributions at depth 24: masses within the unresolved mass, which stays below n^2 2^-k",
            time.perf_counter() - start, 120)


def test_criterion_7_knuth_yao_bits(outcome):
    start = time.perf_counter()
    bad = []
    for p in _distributions():
        e = float(knuth_yao_expected_bits(PrecisionOracle(p), 30))
        h = shannon_entropy(p)
        if not (h - 1e-6 <= e < h + 2):
            bad.append((p, h, e))
    outcome(7, not bad, f"failures: {bad[:3]}" if bad
            else "100 distributions: expected Knuth-Yao bits in [H, H+2) at depth 30",
            time.perf_counter() - start, 60)


def test_criterion_8_minmax_sanity(outcome):
    start = time.perf_counter()
    problems = []
    for name, g in corpus().items():
        for i in g.players:
            pure, mixed = pure_minmax(g, i), mixed_minmax(g, i)
            if not (mixed.lower <= mixed.value <= pure.value):
                problems.append(f"{name} player {i}: mixed above pure")
            for mode, stage in ((PURE, pure.value), (MIXED, mixed.value)):
                for n in range(7):
                    if worst_punishment_value(g, i, n, mode).value != n * stage:
                        problems.append(f"{name} player {i} {mode} n={n}")
        if name in CONSTANT_SUM:
            v = [mixed_minmax(g, i).value for i in g.players]
            if sum(v) != CONSTANT_SUM[name]:
                problems.append(f"{name}: minmax sum {sum(v)} != {CONSTANT_SUM[name]}")
    outcome(8, not problems, "; ".join(problems[:5]) or
            "mixed <= pure minmax on the corpus, constant-sum identity exact, punishment values n x stage for n <= 6",
            time.perf_counter() - start, 60)


@pytest.mark.slow
def test_criterion_9_zero_one_law(outcome, family, zero_one):
    rows, elapsed = zero_one
    problems = []
    for v, two, exactness, general, effective in rows:
        if two not in (CONSTANT, LINEAR) or exactness != EXACT:
            problems.append(f"{v}: two_player {two}/{exactness}")
        if general != two:
            problems.append(f"{v}: general {general} vs two_player {two}")
        if general == CONSTANT and effective != CONSTANT:
            problems.append(f"{v}: effective {effective}")
    linear = sum(r[1] == LINEAR for r in rows)
    outcome(9, not problems, "; ".join(problems[:5]) or
            f"{len(family)} deduplicated 2x2 games: {linear} LINEAR, {len(rows) - linear} CONSTANT, all deciders consistent",
            elapsed, 600)


@pytest.mark.slow
def test_criterion_10_no_pure_equilibrium_in_g2(outcome, zero_one):
    start = time.perf_counter()
    rows, _ = zero_one
    linear = [r[0] for r in rows if r[1] == LINEAR]
    bad = [v for v in linear if pure_repeated_ne_exists(_game(v), 2)]
    outcome(10, bool(linear) and not bad, f"G^2 has a pure NE for {bad[:5]}" if bad
            else f"{len(linear)} LINEAR games: no pure-strategy NE of G^2",
            time.perf_counter() - start, 300)
