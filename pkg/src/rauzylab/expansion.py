"""Iterated Rauzy induction with detectors on the accumulated matrix.

Widths are carried as integers over a fixed common denominator, which is
exact: every split subtracts one width from another, so the denominator
never changes.  Column norms ``|Q_n(alpha)|`` are carried alongside so the
distribution detectors cost ``O(d)`` per step even when ``Q_n`` itself is
not tracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .combinatorics import (
    BOTTOM,
    TOP,
    GeneralizedPermutation,
    SplitRecord,
    canonical,
    rauzy_split,
    split_type,
    switch_defect,
)
from .matrices import ExpansionMatrix

DEFAULT_THRESHOLDS = (2.0, 4.0, 8.0)


class InadmissibleWidths(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionState:
    n: int
    perm: GeneralizedPermutation
    widths: tuple  # un-normalized, exact
    q: ExpansionMatrix
    history: tuple[SplitRecord, ...] = ()

    @classmethod
    def start(cls, perm: GeneralizedPermutation, widths: Sequence) -> "ExpansionState":
        return cls(0, perm, tuple(widths), ExpansionMatrix.identity(perm.d))


def step(s: ExpansionState) -> ExpansionState:
    """One split; raises ``EqualCriticalWidths`` (or a subclass) / ``SelfCritical`` on a halt."""
    perm, widths, (w, l), rec = rauzy_split(s.perm, s.widths)
    return ExpansionState(s.n + 1, perm, widths, s.q.times_elementary(w, l), s.history + (rec,))


def check_admissible(perm: GeneralizedPermutation, widths: Sequence) -> None:
    if len(widths) != perm.d:
        raise InadmissibleWidths(f"expected {perm.d} widths, got {len(widths)}")
    if any(Fraction(x) <= 0 for x in widths):
        raise InadmissibleWidths("widths must be strictly positive")
    if switch_defect(perm, [Fraction(x) for x in widths]) != 0:
        raise InadmissibleWidths("widths violate the switch condition")


def _to_integers(widths: Sequence) -> tuple[list[int], int]:
    fr = [Fraction(x) for x in widths]
    den = math.lcm(*(f.denominator for f in fr))
    return [int(f * den) for f in fr], den


class Orbit:
    """Mutable fast iterator over the expansion of one width vector.

    Transitions of labeled types are memoized; widths are integers.
    """

    _transitions: dict = {}

    def __init__(self, perm: GeneralizedPermutation, widths: Sequence, track_matrix: bool = False,
                 q0: Optional[ExpansionMatrix] = None):
        self.perm = perm
        if all(isinstance(x, int) for x in widths):
            self.widths, self.denominator = list(widths), 1
        else:
            self.widths, self.denominator = _to_integers(widths)
        self.q = q0 if q0 is not None else ExpansionMatrix.identity(perm.d)
        self.norms = list(self.q.column_norms())
        self.track_matrix = track_matrix
        self._cols = [list(c) for c in self.q.cols] if track_matrix else None
        self.n = 0
        self.halt: Optional[str] = None

    def advance(self) -> Optional[SplitRecord]:
        """Perform one split, or set ``halt`` and return ``None``."""
        perm = self.perm
        t, b = perm.top[-1], perm.bottom[-1]
        lam = self.widths
        if t == b:
            self.halt = "self_critical"
            return None
        lt, lb = lam[t - 1], lam[b - 1]
        if lt == lb:
            rev = perm.reversing_top | perm.reversing_bottom
            self.halt = "amalgamation" if rev and rev == {t, b} else "equal_critical_widths"
            return None
        side = TOP if lt > lb else BOTTOM
        key = (perm, side)
        hit = self._transitions.get(key)
        if hit is None:
            hit = self._transitions[key] = split_type(perm, side)
        self.perm, rec = hit
        w, l = rec.winner - 1, rec.loser - 1
        lam[w] -= lam[l]
        self.norms[l] += self.norms[w]
        if self._cols is not None:
            cw, cl = self._cols[w], self._cols[l]
            for i in range(len(cl)):
                cl[i] += cw[i]
        self.n += 1
        return rec

    def matrix(self) -> ExpansionMatrix:
        if self._cols is None:
            raise RuntimeError("orbit does not track its matrix")
        return ExpansionMatrix(tuple(tuple(c) for c in self._cols))

    def diameter_squared(self) -> Fraction:
        if self._cols is None:
            raise RuntimeError("orbit does not track its matrix")
        return diameter_squared(self._cols, self.norms)

    def columns_float(self) -> np.ndarray:
        """Projectivized columns (as rows of the result), in floating point."""
        return np.array([[a / n for a in c] for c, n in zip(self._cols, self.norms)])


def norm_ratio(norms: Sequence[int]) -> float:
    return max(norms) / min(norms)


def vertex_norms_from_columns(perm: GeneralizedPermutation, norms: Sequence[int]) -> list[Fraction]:
    """``|Q v|`` for the vertices of the current configuration space, from column norms."""
    st, sb = perm.reversing_top, perm.reversing_bottom
    out = [Fraction(norms[a - 1] + norms[b - 1], 2) for a in sorted(st) for b in sorted(sb)]
    out += [Fraction(norms[r - 1]) for r in perm.labels if r not in st and r not in sb]
    return out


def diameter_squared(cols: Sequence[Sequence[int]], norms: Sequence[int]) -> Fraction:
    """Exact squared diameter of the simplex spanned by projectivized integer columns."""
    best = Fraction(0)
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            ni, nj = norms[i], norms[j]
            num = sum((a * nj - b * ni) ** 2 for a, b in zip(cols[i], cols[j]))
            best = max(best, Fraction(num, (ni * nj) ** 2))
    return best


def diameter(q: ExpansionMatrix) -> float:
    """Euclidean diameter of ``JQ(Delta)``: the longest edge between projectivized columns."""
    return math.sqrt(diameter_squared(q.cols, q.column_norms()))


def boundary_distance(point: Sequence[float]) -> float:
    """Distance from a point of ``Delta`` to its boundary, measured inside the simplex's plane."""
    d = len(point)
    return min(point) / math.sqrt(1 - 1 / d)


def shrink_factor_bound(q_seq: ExpansionMatrix, c: float) -> float:
    """``R = C^2(1-2s) / (C^2(1-2s) + 2s)`` for a positive matrix ``q_seq``."""
    s = min(boundary_distance([a / n for a in col]) for col, n in zip(q_seq.cols, q_seq.column_norms()))
    c2 = c * c
    return c2 * (1 - 2 * s) / (c2 * (1 - 2 * s) + 2 * s)


def line_derivative_norms(q: ExpansionMatrix, u1: Sequence, u2: Sequence, ts: Sequence[float]) -> list[float]:
    """``|g'(t)|`` along ``t -> JQ((1-t) u1 + t u2)``."""
    qf = q.to_numpy()
    w1 = qf @ np.asarray(u1, float)
    w2 = qf @ np.asarray(u2, float)
    n1, n2 = w1.sum(), w2.sum()
    num = np.linalg.norm(n1 * w2 - n2 * w1)
    return [num / ((1 - t) * n1 + t * n2) ** 2 for t in ts]


def line_distortion_bound_check(q: ExpansionMatrix, u1: Sequence, u2: Sequence, c: float,
                                ts: Sequence[float] = (0.0, 0.5, 1.0)) -> bool:
    """Derivative magnitudes along a chord differ pairwise by at most ``C^2``."""
    g = line_derivative_norms(q, u1, u2, ts)
    return max(g) <= c * c * min(g) * (1 + 1e-12)


@dataclass
class DetectorReport:
    n: int
    winner: Optional[int]
    loser: Optional[int]
    type_id: object
    column_ratio: float
    vertex_ratio: float
    diameter: Optional[float]
    distributed: dict = field(default_factory=dict)
    uniformly_distorted: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "winner": self.winner,
            "loser": self.loser,
            "type_id": self.type_id,
            "column_ratio": self.column_ratio,
            "vertex_ratio": self.vertex_ratio,
            "diameter": self.diameter,
            "flags": {
                "distributed": {_ckey(c): v for c, v in self.distributed.items()},
                "uniformly_distorted": {_ckey(c): v for c, v in self.uniformly_distorted.items()},
            },
        }


def _ckey(c: float) -> str:
    return f"{c:g}"


@dataclass
class RunSummary:
    steps: int = 0
    halt: Optional[str] = None
    first_distributed: dict = field(default_factory=dict)
    first_distorted: dict = field(default_factory=dict)
    distributed_hits: dict = field(default_factory=dict)


def run(perm: GeneralizedPermutation, widths: Sequence, max_steps: int,
        thresholds: Sequence[float] = DEFAULT_THRESHOLDS, with_diameter: bool = True,
        type_ids: Optional[dict] = None, summary: Optional[RunSummary] = None) -> Iterator[DetectorReport]:
    """Stream one report per stage, starting with stage 0.

    ``summary`` (if given) is filled with first-hit indices and every index at
    which each C-distribution threshold holds.  Halts end the stream and are
    recorded in ``summary.halt``.
    """
    check_admissible(perm, widths)
    orbit = Orbit(perm, widths, track_matrix=with_diameter)
    summary = summary if summary is not None else RunSummary()
    for c in thresholds:
        summary.distributed_hits.setdefault(c, [])
    d = perm.d
    rec = None
    while True:
        p = orbit.perm
        cr = norm_ratio(orbit.norms)
        vn = vertex_norms_from_columns(p, orbit.norms)
        vr = float(max(vn) / min(vn))
        k = d if p.is_classical else d - 1
        dist = {c: cr < c for c in thresholds}
        unif = {c: vr ** k <= c for c in thresholds}
        for c in thresholds:
            if dist[c]:
                summary.first_distributed.setdefault(c, orbit.n)
                summary.distributed_hits[c].append(orbit.n)
            if unif[c]:
                summary.first_distorted.setdefault(c, orbit.n)
        tid = canonical(p)
        tid = type_ids.get(tid, str(tid)) if type_ids is not None else str(tid)
        diam = math.sqrt(orbit.diameter_squared()) if with_diameter else None
        yield DetectorReport(orbit.n, rec.winner if rec else None, rec.loser if rec else None,
                             tid, cr, vr, diam, dist, unif)
        if orbit.n >= max_steps:
            break
        rec = orbit.advance()
        if rec is None:
            break
    summary.steps = orbit.n
    summary.halt = orbit.halt


def winner_runs(winners: Sequence[int]) -> list[tuple[int, int]]:
    """Run-length encoding ``[(winner, length), ...]``."""
    out: list[list[int]] = []
    for w in winners:
        if out and out[-1][0] == w:
            out[-1][1] += 1
        else:
            out.append([w, 1])
    return [tuple(r) for r in out]


def two_band_quotients(p: int, q: int) -> list[int]:
    """Continued fraction of ``width_1 / width_2 = p/q`` read off the Rauzy expansion.

    Uses the two-band classical type ``1 2 / 2 1``.  The final quotient
    includes the one cut that the halting step (equal widths) stands for.
    """
    perm = GeneralizedPermutation((1, 2), (2, 1))
    orbit = Orbit(perm, [p, q])
    winners = []
    while (rec := orbit.advance()) is not None:
        winners.append(rec.winner)
    runs = winner_runs(winners)
    quotients = [n for _, n in runs]
    if runs and runs[0][0] == 2:
        quotients.insert(0, 0)
    if orbit.halt == "equal_critical_widths":
        # the tie stands for one more cut finishing the last Euclidean step
        if quotients:
            quotients[-1] += 1
        else:
            quotients = [1]
    return quotients


def continued_fraction(p: int, q: int) -> list[int]:
    """Partial quotients of ``p / q`` by the Euclidean algorithm."""
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out
