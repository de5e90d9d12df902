"""The four-band reference family of stages and its closed-form invariants.

Start from ``2 2 1 1 / 4 4 3 3`` (reversing bands {1, 2} on top, {3, 4} on
the bottom) and split with winners 3, 3, 2, then 3 repeated ``n`` times,
then 2.  The resulting stage has a quadrilateral configuration space whose
image, the part where band 2 wins the next split, and the column growth
that split causes all have closed forms in ``n``.  ``check`` compares every
one of them with the library's exact computations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .combinatorics import TOP, GeneralizedPermutation, critical_bands
from .geometry import (
    configuration_space,
    elementary_measure_ratio,
    euclidean_measure,
    image_polytope,
    projectivize,
)
from .matrices import ExpansionMatrix
from .montecarlo import Stage, exact_split_probability

START = GeneralizedPermutation((2, 2, 1, 1), (4, 4, 3, 3))
# split band 2 wins over band 1 next; it is the top critical band at every stage of the family
NEXT_WINNER, NEXT_LOSER = 2, 1


def moves(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError("the reference family needs n >= 1")
    return [(3, 1), (3, 1), (2, 3)] + [(3, 2)] * n + [(2, 3)]


def expected_matrix(n: int) -> ExpansionMatrix:
    return ExpansionMatrix(((1, 0, 2, 0), (0, n + 1, n, 0), (0, n + 2, n + 1, 0), (0, 0, 0, 1)))


def expected_vertices(n: int) -> dict[tuple[int, int], tuple[Fraction, ...]]:
    """Projectivized images of the stage's vertex midpoints, keyed by their column pair."""
    F = Fraction
    return {
        (1, 2): (F(1, 2 * (n + 2)), F(n + 1, 2 * (n + 2)), F(1, 2), F(0)),
        (1, 3): (F(1, 2 * (n + 3)), F(n + 2, 2 * (n + 3)), F(1, 2), F(0)),
        (3, 4): (F(0), F(1, 2), F(n + 1, 2 * (n + 2)), F(1, 2 * (n + 2))),
        (2, 4): (F(0), F(1, 2), F(n, 2 * (n + 1)), F(1, 2 * (n + 1))),
    }


def quad_area(n: int) -> float:
    return 1 / (2 * (n + 1) * (n + 2) * (n + 3))


def triangle_area(n: int) -> float:
    return 1 / (4 * (n + 1) * (n + 2) ** 2)


def split_probability(n: int) -> Fraction:
    return Fraction(n + 3, 2 * (n + 2))


def growth_factor(n: int) -> Fraction:
    return Fraction(2 * (n + 2), 3)


def elementary_ratio(n: int) -> Fraction:
    return Fraction(3, 2 * (n + 2))


@dataclass
class CheckReport:
    n: int
    failures: list[str] = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def _close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * abs(b)


def check(n: int, rel: float = 1e-12) -> CheckReport:
    rep = CheckReport(n)
    fail = rep.failures.append
    stage = Stage(START, tuple(moves(n)))
    q = stage.q
    if q != expected_matrix(n):
        fail(f"n={n}: replayed Q differs from the closed form")
    if critical_bands(stage.perm)[0] != NEXT_WINNER or critical_bands(stage.perm)[1] != NEXT_LOSER:
        fail(f"n={n}: critical pair is {critical_bands(stage.perm)}, expected top 2 / bottom 1")
    for (i, j), want in expected_vertices(n).items():
        got = projectivize(q, [Fraction(int(k in (i, j)), 2) for k in range(1, 5)])
        if got != want:
            fail(f"n={n}: JQ({i}{j}) = {got}, expected {want}")
    quad = stage.image()
    tri = image_polytope(q, stage.split_region(TOP))
    a_quad, a_tri = euclidean_measure(quad), euclidean_measure(tri)
    a_w = euclidean_measure(configuration_space(START).polytope())
    rep.values.update(quad_area=a_quad, triangle_area=a_tri, w_area=a_w)
    if not _close(a_quad, quad_area(n), rel):
        fail(f"n={n}: quadrilateral area {a_quad!r}, expected {quad_area(n)!r}")
    if not _close(a_tri, triangle_area(n), rel):
        fail(f"n={n}: triangle area {a_tri!r}, expected {triangle_area(n)!r}")
    if not _close(a_w, 0.5, rel):
        fail(f"n={n}: starting configuration space area {a_w!r}, expected 0.5")
    p = exact_split_probability(stage, TOP)
    rep.values["probability"] = p
    if p != split_probability(n):
        fail(f"n={n}: split probability {p}, expected {split_probability(n)}")
    after = q.times_elementary(NEXT_WINNER, NEXT_LOSER)
    g = Fraction(after.column_norms()[NEXT_LOSER - 1], q.column_norms()[NEXT_LOSER - 1])
    rep.values["growth_factor"] = g
    if g != growth_factor(n):
        fail(f"n={n}: |Q(1)| growth factor {g}, expected {growth_factor(n)}")
    r = elementary_measure_ratio(q, NEXT_WINNER, NEXT_LOSER)
    rep.values["elementary_ratio"] = r
    if r != elementary_ratio(n):
        fail(f"n={n}: elementary measure ratio {r}, expected {elementary_ratio(n)}")
    return rep
