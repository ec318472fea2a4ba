import itertools
import json
from pathlib import Path

import pytest

from repent.corpus import corpus, grid_2x2_family, grid_2x2_game, relabelings_2x2
from repent.game import game_from_json
from repent.values import pure_ne

GAMES_DIR = Path(__file__).resolve().parent.parent / "games"


def test_relabelings_form_a_group_orbit():
    v = (0, 1, 2, 3, 4, 0, 1, 2)
    images = relabelings_2x2(v)
    assert len(images) == 8 and v in images
    for w in images:
        assert sorted(relabelings_2x2(w)) == sorted(images)


def test_family_covers_every_game_once():
    family = set(grid_2x2_family(1))
    for v in itertools.product(range(2), repeat=8):
        assert len(family.intersection(relabelings_2x2(v))) == 1


def test_relabeling_preserves_equilibria():
    v = (4, 0, 3, 1, 0, 4, 1, 3)
    g = grid_2x2_game(v)
    count = len(pure_ne(g))
    for w in relabelings_2x2(v):
        assert len(pure_ne(grid_2x2_game(w))) == count


@pytest.mark.parametrize("name", sorted(corpus()))
def test_exported_games_match_corpus(name):
    data = json.loads((GAMES_DIR / f"{name}.json").read_text())
    assert game_from_json(data) == corpus()[name]
