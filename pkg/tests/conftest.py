from fractions import Fraction

import pytest
from hypothesis import strategies as st

from repent.corpus import corpus, matching_pennies, prisoners_dilemma
from repent.game import Game, normalize


@pytest.fixture
def mp():
    return matching_pennies()


@pytest.fixture
def pd():
    return normalize(prisoners_dilemma())


@pytest.fixture(params=sorted(corpus()))
def corpus_game(request):
    return request.param, normalize(corpus()[request.param])


quarters = st.integers(0, 4).map(lambda k: Fraction(k, 4))


@st.composite
def grid_games(draw, shapes=((2, 2), (2, 3), (3, 2), (3, 3))):
    rows, cols = draw(st.sampled_from(shapes))
    a = [[draw(quarters) for _ in range(cols)] for _ in range(rows)]
    b = [[draw(quarters) for _ in range(cols)] for _ in range(rows)]
    return Game.bimatrix(a, b)


@st.composite
def distributions(draw, max_n=5, max_den=64, n=None):
    """Strictly positive rational distributions with a common denominator."""
    n = draw(st.integers(1, max_n)) if n is None else n
    if n == 1:
        return [Fraction(1)]
    den = draw(st.integers(n, max_den))
    cuts = sorted(draw(st.lists(st.integers(1, den - 1), min_size=n - 1, max_size=n - 1, unique=True)))
    edges = [0] + cuts + [den]
    return [Fraction(edges[k + 1] - edges[k], den) for k in range(n)]
