"""Small named games used by the tests, the scripts and the CLI examples."""

from __future__ import annotations

import itertools
from fractions import Fraction

from .game import Game


def _q(rows):
    return [[Fraction(x, 4) for x in row] for row in rows]


def matching_pennies() -> Game:
    return Game.bimatrix([[1, 0], [0, 1]], [[0, 1], [1, 0]], (("H", "T"), ("H", "T")))


def prisoners_dilemma() -> Game:
    return Game.bimatrix([[3, 0], [5, 1]], [[3, 5], [0, 1]], (("C", "D"), ("C", "D")))


def rock_paper_scissors() -> Game:
    a = [[1, 0, 2], [2, 1, 0], [0, 2, 1]]
    b = [[2 - x for x in row] for row in a]
    names = ("R", "P", "S")
    return Game.bimatrix(a, b, (names, names))


def battle_of_sexes() -> Game:
    return Game.bimatrix([[3, 0], [0, 2]], [[2, 0], [0, 3]], (("O", "F"), ("O", "F")))


def stag_hunt() -> Game:
    return Game.bimatrix([[4, 0], [3, 3]], [[4, 3], [0, 3]], (("S", "H"), ("S", "H")))


def chicken() -> Game:
    return Game.bimatrix([[3, 1], [4, 0]], [[3, 4], [1, 0]], (("C", "D"), ("C", "D")))


def reward_two_blocks() -> Game:
    """No pure NE; a strictly individually rational mixed NE for one player (two reward blocks)."""
    return Game.bimatrix(_q([[0, 0, 4], [0, 2, 3]]), _q([[1, 4, 0], [0, 0, 1]]))


def stage_ne_concatenation() -> Game:
    """No pure NE; a one-sided best-responding support plus a strictly IR stage NE."""
    return Game.bimatrix(_q([[4, 3], [1, 4], [1, 1]]), _q([[3, 4], [4, 3], [0, 0]]))


def ordered_rewards() -> Game:
    """No pure NE; needs an ordering of reward blocks with indifferent later players."""
    return Game.bimatrix(_q([[4, 0], [2, 1], [0, 2]]), _q([[0, 3], [2, 2], [1, 0]]))


def three_player_pennies() -> Game:
    """Player 2 wants to match player 0, player 0 wants to match player 1, player 1 wants to mismatch player 2."""
    payoffs = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                payoffs[(a, b, c)] = (int(a == b), int(b != c), int(c == a))
    return Game.from_payoffs((2, 2, 2), payoffs)


def three_player_coordination() -> Game:
    payoffs = {}
    for a in range(2):
        for b in range(2):
            for c in range(2):
                same = int(a == b == c)
                payoffs[(a, b, c)] = (same, same, same)
    return Game.from_payoffs((2, 2, 2), payoffs)


CORPUS = {
    "matching_pennies": matching_pennies,
    "prisoners_dilemma": prisoners_dilemma,
    "rock_paper_scissors": rock_paper_scissors,
    "battle_of_sexes": battle_of_sexes,
    "stag_hunt": stag_hunt,
    "chicken": chicken,
    "reward_two_blocks": reward_two_blocks,
    "stage_ne_concatenation": stage_ne_concatenation,
    "ordered_rewards": ordered_rewards,
    "three_player_pennies": three_player_pennies,
    "three_player_coordination": three_player_coordination,
}

CONSTANT_SUM = {"matching_pennies": 1, "rock_paper_scissors": 2}


def corpus() -> dict[str, Game]:
    return {name: make() for name, make in CORPUS.items()}


# -- exhaustive 2x2 grid family ---------------------------------------------------


def _flip_rows(m):
    return (m[2], m[3], m[0], m[1])


def _flip_cols(m):
    return (m[1], m[0], m[3], m[2])


def _transpose(m):
    return (m[0], m[2], m[1], m[3])


def relabelings_2x2(v: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Images of (a00 a01 a10 a11 b00 b01 b10 b11) under row, column and player swaps."""
    a, b = v[:4], v[4:]
    out = []
    for x, y in ((a, b), (_transpose(b), _transpose(a))):
        for rows, cols in itertools.product((False, True), repeat=2):
            def relabel(m, rows=rows, cols=cols):
                m = _flip_rows(m) if rows else m
                return _flip_cols(m) if cols else m
            out.append(relabel(x) + relabel(y))
    return out


def grid_2x2_family(steps: int = 4) -> list[tuple[int, ...]]:
    """Grid indices of every 2x2 game with payoffs in {0, 1/steps, ..., 1}, one per relabeling class."""
    return [
        v for v in itertools.product(range(steps + 1), repeat=8)
        if min(relabelings_2x2(v)) == v
    ]


def grid_2x2_game(v: tuple[int, ...], steps: int = 4) -> Game:
    q = [Fraction(k, steps) for k in v]
    return Game.bimatrix([q[0:2], q[2:4]], [q[4:6], q[6:8]])
