import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzylab.combinatorics import EqualCriticalWidths, GeneralizedPermutation as GP, replay_winner_sequence
from rauzylab.expansion import (
    ExpansionState,
    InadmissibleWidths,
    Orbit,
    RunSummary,
    check_admissible,
    continued_fraction,
    diameter,
    line_derivative_norms,
    line_distortion_bound_check,
    norm_ratio,
    run,
    shrink_factor_bound,
    step,
    two_band_quotients,
    vertex_norms_from_columns,
    winner_runs,
)
from rauzylab.geometry import configuration_space, vertex_norms
from rauzylab.matrices import ExpansionMatrix
from rauzylab.montecarlo import PolytopeSampler, integer_widths, substreams

from conftest import FIVE_BAND, FOUR_BAND, THREE_BAND, TWO_BAND, reference_moves


def test_single_step():
    s = step(ExpansionState.start(TWO_BAND, (Fraction(3, 5), Fraction(2, 5))))
    assert s.widths == (Fraction(1, 5), Fraction(2, 5))
    assert s.history[0].winner == 1


def _random_admissible(perm, seed, bits=64):
    x = PolytopeSampler(configuration_space(perm).polytope()).sample_exact(substreams(seed, 1)[0], bits)
    return list(x)


@pytest.mark.parametrize("perm", [TWO_BAND, THREE_BAND, FOUR_BAND, FIVE_BAND])
def test_state_invariants(perm):
    x = _random_admissible(perm, 1)
    s = ExpansionState.start(perm, x)
    for _ in range(60):
        try:
            s = step(s)
        except EqualCriticalWidths:
            break
        assert s.q.apply(s.widths) == tuple(x)
        assert s.q.det() == 1
        assert all(w > 0 for w in s.widths)


@pytest.mark.parametrize("perm", [THREE_BAND, FOUR_BAND, FIVE_BAND])
def test_fast_orbit_matches_states(perm):
    x = _random_admissible(perm, 2)
    s = ExpansionState.start(perm, x)
    orbit = Orbit(perm, integer_widths(x), track_matrix=True)
    for _ in range(200):
        rec = orbit.advance()
        try:
            s = step(s)
        except EqualCriticalWidths:
            assert rec is None
            break
        assert (rec.winner, rec.loser) == (s.history[-1].winner, s.history[-1].loser)
        assert orbit.perm == s.perm
        assert orbit.matrix() == s.q
        assert tuple(orbit.norms) == s.q.column_norms()


def test_halt_reasons():
    o = Orbit(TWO_BAND, [5, 5])
    assert o.advance() is None and o.halt == "equal_critical_widths"
    o = Orbit(GP((2, 1, 1), (2, 3, 3)), [1, 2, 1])
    assert o.advance() is None and o.halt == "amalgamation"
    o = Orbit(GP((2, 1), (2, 1)), [1, 1])
    assert o.advance() is None and o.halt == "self_critical"


def test_continued_fraction_examples():
    assert continued_fraction(10, 7) == [1, 2, 3]
    assert two_band_quotients(10, 7) == [1, 2, 3]
    assert two_band_quotients(3, 7) == [0, 2, 3]
    assert two_band_quotients(5, 5) == [1]
    assert winner_runs([1, 1, 2, 1]) == [(1, 2), (2, 1), (1, 1)]


@given(st.integers(1, 10**4).flatmap(lambda q: st.tuples(st.integers(1, 10**4), st.just(q))))
@settings(max_examples=300)
def test_two_band_is_euclid(pq):
    p, q = pq
    g = math.gcd(p, q)
    assert two_band_quotients(p, q) == continued_fraction(p // g, q // g)


def test_run_identity_stage_distributed():
    x = [Fraction(1, 4)] * 4
    reports = list(run(FOUR_BAND, x, 0))
    assert len(reports) == 1
    r = reports[0]
    assert r.column_ratio == 1 and all(r.distributed.values())
    assert r.diameter == pytest.approx(math.sqrt(2))


def test_run_records_first_hits_and_halts():
    summary = RunSummary()
    reps = list(run(TWO_BAND, [Fraction(10, 17), Fraction(7, 17)], 100, summary=summary))
    assert summary.halt == "equal_critical_widths"
    assert summary.first_distributed[2.0] == 0
    assert [r.winner for r in reps[1:]] == [1, 2, 2, 1, 1]
    runs = [n for _, n in winner_runs([r.winner for r in reps[1:]])]
    runs[-1] += 1
    assert runs == continued_fraction(10, 7)
    rec = reps[1].to_record()
    assert set(rec) == {"n", "winner", "loser", "type_id", "column_ratio", "vertex_ratio", "diameter", "flags"}
    assert set(rec["flags"]["distributed"]) == {"2", "4", "8"}


def test_inadmissible_widths():
    with pytest.raises(InadmissibleWidths):
        check_admissible(FOUR_BAND, [Fraction(1, 4)] * 3)
    with pytest.raises(InadmissibleWidths):
        check_admissible(FOUR_BAND, [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)])
    with pytest.raises(InadmissibleWidths):
        check_admissible(TWO_BAND, [Fraction(1), Fraction(0)])


def test_reference_family_column_ratio():
    for n in (5, 20, 100):
        q = replay_winner_sequence(FOUR_BAND, reference_moves(n)[:-1])
        assert norm_ratio(q.column_norms()) >= Fraction(2 * n + 3, 3)


def test_vertex_norms_from_columns_match_geometry():
    x = _random_admissible(FIVE_BAND, 4)
    orbit = Orbit(FIVE_BAND, integer_widths(x), track_matrix=True)
    for _ in range(100):
        if orbit.advance() is None:
            break
        space = configuration_space(orbit.perm)
        assert vertex_norms_from_columns(orbit.perm, orbit.norms) == vertex_norms(orbit.matrix(), space)


def test_diameter_identity_and_nesting():
    assert diameter(ExpansionMatrix.identity(3)) == pytest.approx(math.sqrt(2))
    x = _random_admissible(FOUR_BAND, 5, bits=512)
    orbit = Orbit(FOUR_BAND, integer_widths(x), track_matrix=True)
    prev = orbit.diameter_squared()
    for _ in range(500):
        if orbit.advance() is None:
            break
        cur = orbit.diameter_squared()
        assert cur <= prev
        prev = cur


def test_line_distortion_examples():
    assert line_distortion_bound_check(ExpansionMatrix.identity(3), (1, 0, 0), (0, 0.5, 0.5), 1.0001)
    lmat = ExpansionMatrix.from_rows([[1, 0], [1, 1]])
    g = line_derivative_norms(lmat, (1, 0), (0, 1), [0.0, 0.5, 1.0])
    assert max(g) / min(g) == pytest.approx(4.0)
    assert line_distortion_bound_check(lmat, (1, 0), (0, 1), 2.0)


def _boundary_point(d, rng):
    v = np.array([rng.random() for _ in range(d)])
    v[rng.randrange(d)] = 0.0
    return v / v.sum()


def test_line_distortion_on_distributed_stages():
    rng = random.Random(3)
    c = 8.0
    ts = np.linspace(0, 1, 41)
    certified = 0
    for seed in range(6):
        x = _random_admissible(FOUR_BAND, 100 + seed, bits=512)
        orbit = Orbit(FOUR_BAND, integer_widths(x), track_matrix=True)
        for _ in range(400):
            if orbit.advance() is None:
                break
            if norm_ratio(orbit.norms) < c and certified < 25:
                certified += 1
                q = orbit.matrix()
                for _ in range(40):
                    u1, u2 = _boundary_point(4, rng), _boundary_point(4, rng)
                    assert line_distortion_bound_check(q, u1, u2, c, ts)
    assert certified >= 10


def test_shrink_factor_bound_range():
    q = ExpansionMatrix.from_rows([[1, 1], [1, 2]])
    r = shrink_factor_bound(q, 2.0)
    assert 0 < r < 1
