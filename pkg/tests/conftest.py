from fractions import Fraction
from itertools import permutations
import random

import pytest
from hypothesis import strategies as st

from rauzylab.combinatorics import GeneralizedPermutation as GP
from rauzylab.matrices import ExpansionMatrix

FOUR_BAND = GP((2, 2, 1, 1), (4, 4, 3, 3))
THREE_BAND = GP((1, 1, 2), (2, 3, 3))
FIVE_BAND = GP((1, 1, 2, 3), (2, 4, 4, 3, 5, 5))
TWO_BAND = GP((1, 2), (2, 1))


def reference_moves(n):
    return [(3, 1), (3, 1), (2, 3)] + [(3, 2)] * n + [(2, 3)]


def classical_oracle(top, p, winner_top):
    """Textbook Rauzy move on (top word, p) where p[j] is the bottom position of top letter j (0-based)."""
    d = len(top)
    if winner_top:
        # bottom's last letter moves just after the winner's bottom slot
        pd = p[-1]
        q = [pj if pj <= pd else (pd + 1 if pj == d - 1 else pj + 1) for pj in p]
        return list(top), q
    k = p.index(d - 1)
    new_top = list(top[: k + 1]) + [top[-1]] + list(top[k + 1 : -1])
    q = list(p[: k + 1]) + [p[-1]] + list(p[k + 1 : -1])
    return new_top, q


def classical_positions(perm):
    return [perm.bottom.index(a) for a in perm.top]


def from_positions(top, p):
    bottom = [None] * len(top)
    for a, pj in zip(top, p):
        bottom[pj] = a
    return GP(tuple(top), tuple(bottom))


def classical_types(d):
    top = tuple(range(1, d + 1))
    for bottom in permutations(top):
        yield GP(top, bottom)


def random_elementary_product(d, length, rng):
    q = ExpansionMatrix.identity(d)
    for _ in range(length):
        w, l = rng.sample(range(1, d + 1), 2)
        q = q.times_elementary(w, l)
    return q


@st.composite
def labelings(draw, d):
    perm = draw(st.permutations(range(1, d + 1)))
    return {i + 1: perm[i] for i in range(d)}


positive_fractions = st.fractions(min_value=Fraction(1, 10**6), max_value=10, max_denominator=10**6).filter(
    lambda f: f > 0
)


@pytest.fixture
def rng():
    return random.Random(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
