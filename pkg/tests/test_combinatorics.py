from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzylab.combinatorics import (
    BOTTOM,
    TOP,
    AmalgamationCase,
    EqualCriticalWidths,
    GeneralizedPermutation as GP,
    NotCritical,
    SelfCritical,
    all_types,
    canonical,
    critical_bands,
    is_combinatorially_reducible,
    is_measure_reducible,
    rauzy_split,
    reduction_constraint,
    replay_winner_sequence,
    split_type,
    switch_defect,
    validate_type,
)
from rauzylab.matrices import ExpansionMatrix

from conftest import (
    FOUR_BAND,
    THREE_BAND,
    classical_oracle,
    classical_positions,
    classical_types,
    from_positions,
    labelings,
    reference_moves,
)


def test_validate_classical_two_band():
    rep = validate_type(GP((1, 2), (2, 1)))
    assert rep.valid and rep.classical
    assert rep.s_top == frozenset() and rep.s_bottom == frozenset()


def test_validate_four_band():
    rep = validate_type(GP((1, 1, 2, 2), (3, 3, 4, 4)))
    assert rep.valid and rep.recurrent and not rep.classical
    assert rep.s_top == {1, 2} and rep.s_bottom == {3, 4}


def test_validate_three_band():
    rep = validate_type(THREE_BAND)
    assert rep.valid and rep.s_top == {1} and rep.s_bottom == {3}


@pytest.mark.parametrize(
    "top,bottom",
    [((1, 1), (2, 2, 3)), ((1, 1, 2), (2,)), ((1, 2), (3, 1)), ((), (1, 1)), ((1, 1, 2, 2), (3, 3, 3))],
)
def test_validate_reports_problems(top, bottom):
    rep = validate_type(GP(top, bottom))
    assert not rep.valid and rep.problems


def test_non_recurrent_reported():
    rep = validate_type(GP((1, 1, 2, 3), (2, 3)))
    assert not rep.recurrent
    assert any("none on the other side" in p for p in rep.problems)


@pytest.mark.parametrize(
    "perm,expected",
    [(GP((1, 2), (2, 1)), (2, 1)), (GP((1, 1, 2, 2), (3, 3, 4, 4)), (2, 4)), (GP((3, 1, 3), (2, 2, 1)), (3, 1))],
)
def test_critical_bands(perm, expected):
    assert critical_bands(perm) == expected


def test_split_widths_two_band():
    perm = GP((1, 2), (2, 1))
    new, widths, pair, rec = rauzy_split(perm, (Fraction(1, 7), Fraction(3, 7)))
    assert rec.winner == 2 and rec.winner_side == TOP and pair == (2, 1)
    assert widths == (Fraction(1, 7), Fraction(2, 7))
    new, widths, pair, rec = rauzy_split(perm, (Fraction(2, 3), Fraction(1, 3)))
    assert rec.winner == 1 and rec.winner_side == BOTTOM
    assert widths == (Fraction(1, 3), Fraction(1, 3))


def test_split_errors():
    with pytest.raises(EqualCriticalWidths):
        rauzy_split(GP((1, 2), (2, 1)), (Fraction(1, 2), Fraction(1, 2)))
    with pytest.raises(SelfCritical):
        rauzy_split(GP((2, 1), (2, 1)), (Fraction(1, 2), Fraction(1, 2)))
    # critical bands 1 and 3 are the only reversing bands, so the switch condition forces a tie
    amal = GP((2, 1, 1), (2, 3, 3))
    with pytest.raises(AmalgamationCase):
        rauzy_split(amal, (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)))
    # equal widths with other reversing bands around is the plain case
    with pytest.raises(EqualCriticalWidths) as exc:
        rauzy_split(FOUR_BAND, (Fraction(1, 4),) * 4)
    assert not isinstance(exc.value, AmalgamationCase)


def test_insertion_sides():
    # winner crosses sides: loser lands just right of the winner's other end
    new, rec = split_type(GP((1, 2, 3), (3, 2, 1)), TOP)
    assert new == GP((1, 2, 3), (3, 1, 2))
    # winner reverses: loser lands just left of the winner's other end
    new, rec = split_type(GP((2, 2, 1, 1), (4, 4, 3, 3)), TOP)
    assert (rec.winner, rec.loser) == (1, 3)
    assert new == GP((2, 2, 3, 1, 1), (4, 4, 3))


def test_reference_matrix():
    for n in range(1, 21):
        q = replay_winner_sequence(FOUR_BAND, reference_moves(n))
        assert q.rows() == ((1, 0, 0, 0), (0, n + 1, n + 2, 0), (2, n, n + 1, 0), (0, 0, 0, 1))


def test_replay_empty_and_not_critical():
    assert replay_winner_sequence(FOUR_BAND, []) == ExpansionMatrix.identity(4)
    with pytest.raises(NotCritical) as exc:
        replay_winner_sequence(FOUR_BAND, [(1, 2)])
    assert exc.value.step == 0
    with pytest.raises(NotCritical) as exc:
        replay_winner_sequence(FOUR_BAND, [(3, 1), (2, 4)])
    assert exc.value.step == 1


def test_reference_seed_is_unique():
    """Brute force over 4-band types with reversing {1,2} top, {3,4} bottom."""
    target = replay_winner_sequence(FOUR_BAND, reference_moves(3))
    hits = []
    for p in all_types(4, classical=False):
        if p.reversing_top != {1, 2} or p.reversing_bottom != {3, 4}:
            continue
        try:
            q = replay_winner_sequence(p, reference_moves(3))
        except NotCritical:
            continue
        if q == target:
            hits.append(p)
    assert hits == [FOUR_BAND]


@pytest.mark.parametrize("d", range(2, 7))
def test_classical_oracle_exhaustive(d):
    for perm in classical_types(d):
        t, b = critical_bands(perm)
        if t == b:
            with pytest.raises(SelfCritical):
                split_type(perm, TOP)
            continue
        p = classical_positions(perm)
        for side in (TOP, BOTTOM):
            new, _ = split_type(perm, side)
            top2, p2 = classical_oracle(perm.top, p, side == TOP)
            assert new == from_positions(top2, p2), (perm, side)


def test_reducibility_examples():
    w = is_combinatorially_reducible(GP((1, 1, 3), (2, 2, 3)))
    assert w.s1 == {1, 2} and w.s2 == {3}
    assert is_measure_reducible(GP((1, 1, 3), (2, 2, 3))) is not None
    assert is_combinatorially_reducible(GP((1, 2), (2, 1))) is None
    assert is_measure_reducible(GP((1, 2), (2, 1))) is None
    square = GP((1, 1, 2, 2), (3, 3, 4, 4))
    w = is_combinatorially_reducible(square)
    assert w.s1 == {1, 3} and w.s2 == {2, 4}
    assert is_measure_reducible(square) is None
    # the cut's extra equation is lambda_3 = lambda_1: neither vacuous nor the switch condition
    bottom, top = reduction_constraint(square, w.s1)
    assert bottom == {3} and top == {1}
    assert (bottom, top) != (square.reversing_bottom, square.reversing_top)


def test_measure_reducible_brute_force():
    """Measure reducibility means every admissible width vector admits the cut."""
    import itertools

    for p in all_types(3, classical=False):
        w = is_measure_reducible(p)
        c = is_combinatorially_reducible(p)
        if w is not None:
            assert c is not None
            bottom, top = reduction_constraint(p, w.s1)
            # constraint is implied by the switch condition for every width vector
            for widths in itertools.product([1, 2, 3, 5], repeat=3):
                if switch_defect(p, widths) == 0:
                    assert sum(widths[a - 1] for a in bottom) == sum(widths[a - 1] for a in top)


@given(st.sampled_from(sorted(all_types(3), key=str) + sorted(all_types(4), key=str)[::7]), st.data())
@settings(max_examples=200, deadline=None)
def test_canonical_relabel_invariant(perm, data):
    sigma = data.draw(labelings(perm.d))
    assert canonical(perm.relabel(sigma)) == canonical(perm)


@given(st.sampled_from(sorted(all_types(4, classical=False), key=str)), st.data())
@settings(max_examples=200, deadline=None)
def test_split_commutes_with_relabeling(perm, data):
    sigma = data.draw(labelings(perm.d))
    t, b = critical_bands(perm)
    if t == b:
        return
    for side in (TOP, BOTTOM):
        new, rec = split_type(perm, side)
        new2, rec2 = split_type(perm.relabel(sigma), side)
        assert new2 == new.relabel(sigma)
        assert (rec2.winner, rec2.loser) == (sigma[rec.winner], sigma[rec.loser])


@given(st.lists(st.integers(1, 50), min_size=4, max_size=4))
@settings(max_examples=200, deadline=None)
def test_split_invariants(seed_widths):
    # make the widths admissible for the four-band type: 1 + 2 = 3 + 4
    a, b, c, _ = seed_widths
    if c >= a + b:
        return
    widths = (Fraction(a), Fraction(b), Fraction(c), Fraction(a + b - c))
    perm = FOUR_BAND
    for _ in range(30):
        try:
            new, w2, (win, lose), rec = rauzy_split(perm, widths)
        except EqualCriticalWidths:
            return
        assert sorted(new.top + new.bottom) == sorted(perm.top + perm.bottom)
        assert switch_defect(new, w2) == 0
        assert all(x > 0 for x in w2)
        assert sum(w2) == sum(widths) - widths[lose - 1]
        e = ExpansionMatrix.identity(4).times_elementary(win, lose)
        assert e.apply(w2) == widths
        perm, widths = new, w2


def test_type_json_roundtrip_and_rejects():
    p = FOUR_BAND
    assert GP.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        GP.from_dict({"top": [1, 2], "bottom": [2, 1], "extra": 1})
    with pytest.raises(ValueError):
        GP.from_dict({"d": 3, "top": [1, 2], "bottom": [2, 1]})
