"""Combinatorial types of (non-classical) interval exchanges and the Rauzy split.

A type is a pair of rows of band ends, read left to right.  Every label
``1..d`` occurs exactly twice across the two rows; a label occurring twice in
the same row is an orientation-reversing band on that side.  The rightmost end
of each row is its *critical* position.

Widths are exact (``int`` or ``Fraction``); nothing in this module touches
floating point.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .matrices import ExpansionMatrix

TOP = "top"
BOTTOM = "bottom"


class SplitError(ValueError):
    """A Rauzy split that cannot be performed."""


class EqualCriticalWidths(SplitError):
    """The two critical bands have the same width; the split is undefined."""


class AmalgamationCase(EqualCriticalWidths):
    """Equal critical widths where the critical bands are the only reversing bands.

    The correct continuation would merge the two critical ends into one band
    and drop to a classical exchange on ``d - 1`` bands.  This is reported,
    never performed.
    """


class SelfCritical(SplitError):
    """One band owns both critical ends."""


class NotCritical(SplitError):
    """A prescribed (winner, loser) pair is not the critical pair at some step."""

    def __init__(self, step: int, message: str = ""):
        super().__init__(message or f"pair at step {step} is not critical")
        self.step = step


@dataclass(frozen=True)
class GeneralizedPermutation:
    top: tuple[int, ...]
    bottom: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "top", tuple(int(a) for a in self.top))
        object.__setattr__(self, "bottom", tuple(int(a) for a in self.bottom))

    @property
    def d(self) -> int:
        return (len(self.top) + len(self.bottom)) // 2

    @property
    def labels(self) -> range:
        return range(1, self.d + 1)

    @property
    def reversing_top(self) -> frozenset[int]:
        c = Counter(self.top)
        return frozenset(a for a, k in c.items() if k == 2)

    @property
    def reversing_bottom(self) -> frozenset[int]:
        c = Counter(self.bottom)
        return frozenset(a for a, k in c.items() if k == 2)

    @property
    def is_classical(self) -> bool:
        return not self.reversing_top and not self.reversing_bottom

    def rows(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.top, self.bottom

    def relabel(self, sigma: dict[int, int]) -> "GeneralizedPermutation":
        return GeneralizedPermutation(
            tuple(sigma[a] for a in self.top), tuple(sigma[a] for a in self.bottom)
        )

    def to_dict(self) -> dict:
        return {"d": self.d, "top": list(self.top), "bottom": list(self.bottom)}

    @classmethod
    def from_dict(cls, data: dict) -> "GeneralizedPermutation":
        if not isinstance(data, dict) or "top" not in data or "bottom" not in data:
            raise ValueError("type must be an object with 'top' and 'bottom' lists")
        unknown = set(data) - {"d", "top", "bottom"}
        if unknown:
            raise ValueError(f"unknown fields in type: {sorted(unknown)}")
        perm = cls(tuple(data["top"]), tuple(data["bottom"]))
        if "d" in data and int(data["d"]) != perm.d:
            raise ValueError(f"declared d={data['d']} but rows hold {perm.d} bands")
        return perm

    def __str__(self):
        return f"{' '.join(map(str, self.top))} / {' '.join(map(str, self.bottom))}"


@dataclass(frozen=True)
class SplitRecord:
    winner: int
    loser: int
    winner_side: str

    def __post_init__(self):
        if self.winner == self.loser:
            raise ValueError("winner and loser must differ")


@dataclass(frozen=True)
class ReductionWitness:
    s1: frozenset[int]
    s2: frozenset[int]
    kind: str  # "combinatorial" or "measure"
    cut: tuple[int, int] = (0, 0)


@dataclass
class ValidationReport:
    s_top: frozenset[int]
    s_bottom: frozenset[int]
    classical: bool
    recurrent: bool
    problems: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.problems


def validate_type(perm: GeneralizedPermutation) -> ValidationReport:
    """Check the type invariants, collecting every violation instead of raising."""
    problems = []
    if len(perm.top) < 1:
        problems.append("top row is empty")
    if len(perm.bottom) < 1:
        problems.append("bottom row is empty")
    if (len(perm.top) + len(perm.bottom)) % 2:
        problems.append("odd number of band ends")
    counts = Counter(perm.top + perm.bottom)
    d = perm.d
    bad = sorted(a for a, k in counts.items() if k != 2 or not 1 <= a <= d)
    if bad:
        problems.append(f"labels not occurring exactly twice in 1..{d}: {bad}")
    missing = sorted(set(range(1, d + 1)) - set(counts))
    if missing:
        problems.append(f"missing labels: {missing}")
    st, sb = perm.reversing_top, perm.reversing_bottom
    recurrent = bool(st) == bool(sb)
    if not recurrent:
        side = "top" if st else "bottom"
        problems.append(
            f"reversing bands {sorted(st or sb)} on {side} with none on the other side"
        )
    return ValidationReport(st, sb, not st and not sb, recurrent, problems)


def critical_bands(perm: GeneralizedPermutation) -> tuple[int, int]:
    return perm.top[-1], perm.bottom[-1]


def switch_defect(perm: GeneralizedPermutation, widths: Sequence) -> Fraction:
    """Signed defect of the switch condition: reversing-top minus reversing-bottom."""
    return sum((widths[a - 1] for a in perm.reversing_top), Fraction(0)) - sum(
        (widths[a - 1] for a in perm.reversing_bottom), Fraction(0)
    )


def split_type(perm: GeneralizedPermutation, winner_side: str) -> tuple[GeneralizedPermutation, SplitRecord]:
    """Purely combinatorial split where the critical band on ``winner_side`` wins.

    The loser's critical end is removed and reattached beside the winner's
    other end: just right of it if the winner crosses sides, just left of it
    if the winner is reversing.  The winner keeps its critical slot.
    """
    if winner_side not in (TOP, BOTTOM):
        raise ValueError(f"winner_side must be {TOP!r} or {BOTTOM!r}")
    t, b = critical_bands(perm)
    if t == b:
        raise SelfCritical(f"band {t} occupies both critical positions")
    rows = [list(perm.top), list(perm.bottom)]
    ws = 0 if winner_side == TOP else 1
    ls = 1 - ws
    winner, loser = rows[ws][-1], rows[ls][-1]
    rows[ls].pop()
    if winner in rows[ls]:
        i = rows[ls].index(winner)
        rows[ls].insert(i + 1, loser)
    else:
        i = rows[ws].index(winner)  # first occurrence, the non-critical one
        rows[ws].insert(i, loser)
    new = GeneralizedPermutation(tuple(rows[0]), tuple(rows[1]))
    return new, SplitRecord(winner, loser, winner_side)


def rauzy_split(perm: GeneralizedPermutation, widths: Sequence):
    """One Rauzy induction step.

    Returns ``(perm', widths', (winner, loser), record)``; the pair describes the
    elementary matrix ``E = I + M[winner, loser]`` with ``widths = E widths'``.
    """
    t, b = critical_bands(perm)
    if t == b:
        raise SelfCritical(f"band {t} occupies both critical positions")
    lt, lb = widths[t - 1], widths[b - 1]
    if lt == lb:
        reversing = perm.reversing_top | perm.reversing_bottom
        if reversing and reversing == {t, b}:
            raise AmalgamationCase(f"bands {t} and {b} are the only reversing bands and have equal width")
        raise EqualCriticalWidths(f"critical bands {t} and {b} both have width {lt}")
    side = TOP if lt > lb else BOTTOM
    new, rec = split_type(perm, side)
    out = list(widths)
    out[rec.winner - 1] = widths[rec.winner - 1] - widths[rec.loser - 1]
    return new, tuple(out), (rec.winner, rec.loser), rec


def winner_side_of(perm: GeneralizedPermutation, winner: int, loser: int) -> Optional[str]:
    t, b = critical_bands(perm)
    if (winner, loser) == (t, b):
        return TOP
    if (winner, loser) == (b, t):
        return BOTTOM
    return None


def replay_winner_sequence(
    perm: GeneralizedPermutation, seq: Iterable[tuple[int, int]]
) -> ExpansionMatrix:
    """Accumulated matrix of a prescribed sequence of (winner, loser) splits."""
    q = ExpansionMatrix.identity(perm.d)
    for step, (winner, loser) in enumerate(seq):
        side = winner_side_of(perm, winner, loser)
        if side is None or winner == loser:
            raise NotCritical(step, f"step {step}: ({winner}, {loser}) not critical in {perm}")
        perm, _ = split_type(perm, side)
        q = q.times_elementary(winner, loser)
    return q


def replay_path(perm: GeneralizedPermutation, seq: Iterable[tuple[int, int]]) -> list[GeneralizedPermutation]:
    """Types visited while replaying ``seq`` (including the start)."""
    out = [perm]
    for step, (winner, loser) in enumerate(seq):
        side = winner_side_of(perm, winner, loser)
        if side is None:
            raise NotCritical(step)
        perm, _ = split_type(perm, side)
        out.append(perm)
    return out


def _cuts(perm: GeneralizedPermutation):
    """Prefix pairs holding every end of their labels.

    Each piece must be recurrent by itself (reversing bands on both sides
    or on neither), otherwise cutting there would force a zero width.
    """
    top, bottom = perm.top, perm.bottom
    n = perm.d
    st, sb = perm.reversing_top, perm.reversing_bottom
    for i in range(len(top) + 1):
        for j in range(len(bottom) + 1):
            prefix = Counter(top[:i]) + Counter(bottom[:j])
            if not prefix or len(prefix) == n:
                continue
            if all(k == 2 for k in prefix.values()):
                s1 = frozenset(prefix)
                s2 = frozenset(perm.labels) - s1
                if all(bool(s & st) == bool(s & sb) for s in (s1, s2)):
                    yield (i, j), s1, s2


def is_combinatorially_reducible(perm: GeneralizedPermutation) -> Optional[ReductionWitness]:
    for cut, s1, s2 in _cuts(perm):
        return ReductionWitness(s1, s2, "combinatorial", cut)
    return None


def is_measure_reducible(perm: GeneralizedPermutation) -> Optional[ReductionWitness]:
    """A combinatorial reduction that holds for every width vector, if any.

    A cut works for all widths exactly when the reversing bands sit entirely on
    one side of it.
    """
    reversing = perm.reversing_top | perm.reversing_bottom
    for cut, s1, s2 in _cuts(perm):
        if reversing <= s1 or reversing <= s2:
            return ReductionWitness(s1, s2, "measure", cut)
    return None


def reduction_constraint(perm: GeneralizedPermutation, s1: frozenset[int]) -> tuple[frozenset[int], frozenset[int]]:
    """Reversing bands of ``s1`` on (bottom, top): the extra equation a cut imposes."""
    return perm.reversing_bottom & s1, perm.reversing_top & s1


def canonical(perm: GeneralizedPermutation) -> GeneralizedPermutation:
    """Relabel by order of first appearance, scanning the top row then the bottom."""
    sigma: dict[int, int] = {}
    for a in perm.top + perm.bottom:
        if a not in sigma:
            sigma[a] = len(sigma) + 1
    return perm.relabel(sigma)


def all_types(d: int, classical: Optional[bool] = None):
    """Every valid labeled type on ``d`` bands (exponential; for tests with small d)."""
    from itertools import permutations

    ends = [a for a in range(1, d + 1) for _ in range(2)]
    seen = set()
    for arrangement in set(permutations(ends)):
        for cut in range(1, 2 * d):
            p = GeneralizedPermutation(arrangement[:cut], arrangement[cut:])
            if p in seen:
                continue
            seen.add(p)
            rep = validate_type(p)
            if not rep.valid:
                continue
            if classical is not None and rep.classical != classical:
                continue
            yield p
