"""Sampling on configuration polytopes and statistical experiments on expansions.

Randomness comes from numpy's counter-based Philox generator.  Each orbit
job gets its own substream spawned from one ``SeedSequence``, so results do
not depend on the order in which jobs run.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .combinatorics import TOP, GeneralizedPermutation, canonical, critical_bands, replay_path, replay_winner_sequence
from .diagram import RauzyDiagram, build_diagram, enumerate_sequences, find_positive_sequence, successors
from .expansion import Orbit, shrink_factor_bound
from .geometry import (
    ConfigurationSpace,
    PlanePolytope,
    clip_halfspace,
    configuration_space,
    ge_halfspace,
    image_measure,
    image_polytope,
)
from .matrices import ExpansionMatrix


def substreams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def default_bits(steps: int) -> int:
    """Binary digits of width precision for an orbit of ``steps`` splits (about 0.15 bits are used per split)."""
    return 128 + steps // 2


@dataclass
class ExperimentConfig:
    seed: int = 0
    n_samples: int = 10_000
    max_steps: int = 1000
    c_thresholds: tuple[float, ...] = (2.0, 4.0, 8.0)
    m_values: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 64.0)
    k: int = 3
    alpha: Optional[int] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if any(c <= 1 for c in self.c_thresholds) or any(m <= 1 for m in self.m_values):
            raise ValueError("all C and M thresholds must exceed 1")


class PolytopeSampler:
    """Uniform sampling on a triangulated polytope."""

    def __init__(self, polytope: PlanePolytope):
        if polytope.is_empty:
            raise ValueError("cannot sample an empty polytope")
        self.polytope = polytope
        self.weights = polytope.simplex_chart_measures()
        total = sum(self.weights, Fraction(0))
        acc, cum = Fraction(0), []
        for w in self.weights:
            acc += w
            cum.append(float(acc / total))
        cum[-1] = 1.0
        self.cumulative = cum
        self._verts = np.array([[[float(a) for a in v] for v in s] for s in polytope.simplices])

    def pick(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        return np.searchsorted(self.cumulative, u, side="right") if size is not None else \
            bisect.bisect_right(self.cumulative, u)

    def sample_exact(self, rng: np.random.Generator, bits: int = 256) -> tuple[Fraction, ...]:
        """Exact rational point: spacings of sorted ``bits``-bit integers as barycentric weights."""
        simplex = self.polytope.simplices[self.pick(rng)]
        k = len(simplex) - 1
        nbytes = (bits + 7) // 8
        cuts = sorted(int.from_bytes(rng.bytes(nbytes), "little") for _ in range(k))
        top = 1 << (8 * nbytes)
        gaps = [b - a for a, b in zip([0] + cuts, cuts + [top])]
        d = len(simplex[0])
        return tuple(sum((g * v[i] for g, v in zip(gaps, simplex)), Fraction(0)) / top for i in range(d))

    def sample_float(self, rng: np.random.Generator, size: int) -> np.ndarray:
        idx = self.pick(rng, size)
        k = self._verts.shape[1] - 1
        u = np.sort(rng.random((size, k)), axis=1)
        gaps = np.diff(np.concatenate([np.zeros((size, 1)), u, np.ones((size, 1))], axis=1), axis=1)
        return np.einsum("nk,nkd->nd", gaps, self._verts[idx])


def sample_uniform(space, rng: np.random.Generator, bits: int = 256) -> tuple[Fraction, ...]:
    poly = space.polytope() if isinstance(space, ConfigurationSpace) else space
    return PolytopeSampler(poly).sample_exact(rng, bits)


def integer_widths(x: Sequence[Fraction]) -> list[int]:
    den = math.lcm(*(Fraction(a).denominator for a in x))
    return [int(Fraction(a) * den) for a in x]


@dataclass
class Stage:
    """A finite splitting path from ``start``, given by labeled (winner, loser) pairs."""

    start: GeneralizedPermutation
    moves: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        self.moves = tuple(self.moves)
        self.q: ExpansionMatrix = replay_winner_sequence(self.start, self.moves)
        self.perm: GeneralizedPermutation = replay_path(self.start, self.moves)[-1]
        self.space: ConfigurationSpace = configuration_space(self.perm)
        self.space0: ConfigurationSpace = configuration_space(self.start)

    @property
    def polytope(self) -> PlanePolytope:
        return self.space.polytope()

    def image(self) -> PlanePolytope:
        return image_polytope(self.q, self.polytope)

    def split_region(self, side: str = TOP) -> PlanePolytope:
        """Part of ``W_n`` where the critical band on ``side`` wins the next split."""
        t, b = critical_bands(self.perm)
        w, l = (t, b) if side == TOP else (b, t)
        return clip_halfspace(self.polytope, ge_halfspace(self.perm.d, w, l))

    def pull_back(self, x: Sequence) -> list:
        """Widths at this stage for a point ``x`` of the image (``Q^{-1} x``, un-normalized)."""
        lam = list(x)
        for w, l in self.moves:
            lam[w - 1] -= lam[l - 1]
        return lam


def exact_split_probability(stage: Stage, side: str = TOP) -> Fraction:
    """Relative measure, inside ``JQ(W_n)``, of the points whose next split has ``side`` winning."""
    whole = image_measure(stage.q, stage.polytope)
    part = stage.split_region(side)
    return image_measure(stage.q, part) / whole if not part.is_empty else Fraction(0)


@dataclass
class Estimate:
    value: float
    stderr: float
    exact: Optional[Fraction] = None
    n: int = 0

    @property
    def z(self) -> float:
        if self.exact is None:
            return float("nan")
        diff = abs(self.value - float(self.exact))
        if self.stderr == 0:
            return 0.0 if diff < 1e-12 else math.inf
        return diff / self.stderr


def estimate_split_probability(stage: Stage, n: int, rng: np.random.Generator, side: str = TOP) -> Estimate:
    """Importance-sampled split frequency.

    Points are drawn uniformly on ``W_n`` and weighted by the restricted
    Jacobian of ``JQ``, which is proportional to ``|Qy|^-(d-1)`` (``|Qy|^-d``
    for classical types); the weighted frequency is the probability under the
    normalized measure on the starting configuration space.
    """
    ys = PolytopeSampler(stage.polytope).sample_float(rng, n)
    norms = np.array([float(c) for c in stage.q.column_norms()])
    qy = ys @ (norms / norms.max())
    power = stage.perm.d if stage.space.classical else stage.perm.d - 1
    w = qy ** (-power)
    t, b = critical_bands(stage.perm)
    win, lose = (t, b) if side == TOP else (b, t)
    hit = ys[:, win - 1] > ys[:, lose - 1]
    sw = w.sum()
    p = float((w * hit).sum() / sw)
    se = float(np.sqrt((w ** 2 * (hit - p) ** 2).sum()) / sw)
    return Estimate(p, se, exact_split_probability(stage, side), n)


def random_stage(start: GeneralizedPermutation, length: int, rng: np.random.Generator) -> Stage:
    perm, moves = start, []
    for _ in range(length):
        options = successors(perm)
        if not options:
            break
        _, perm, move = options[int(rng.integers(len(options)))]
        moves.append(move)
    return Stage(start, tuple(moves))


# --- orbit experiments ------------------------------------------------------


def _below(norms: Sequence[int], c: Fraction) -> bool:
    """Exact ``max/min < C`` on (possibly huge) integer norms."""
    return max(norms) * c.denominator < c.numerator * min(norms)


@dataclass
class NormIncreaseResult:
    proportions: dict
    censored: int
    n: int
    precondition_c: Optional[float] = None


def norm_increase_experiment(stage: Stage, alpha: int, m_values: Sequence[float], n: int,
                             max_steps: int, seed: int, c: Optional[float] = None) -> NormIncreaseResult:
    """Proportion of the stage on which column ``alpha`` grows by more than ``M`` before ``alpha`` next wins."""
    norms0 = stage.q.column_norms()
    if c is not None and norms0[alpha - 1] * c < max(norms0):
        raise ValueError(f"column {alpha} is not within a factor {c} of the largest column")
    sampler = PolytopeSampler(stage.image())
    bits = default_bits(max_steps) + 2 * sum(n.bit_length() for n in norms0)
    hits = Counter()
    censored = 0
    for rng in substreams(seed, n):
        x = sampler.sample_exact(rng, bits)
        orbit = Orbit(stage.perm, integer_widths(stage.pull_back(x)), q0=stage.q)
        done = False
        while orbit.n < max_steps:
            rec = orbit.advance()
            if rec is None:
                break
            if rec.winner == alpha:
                done = True
                break
        if not done:
            censored += 1
            continue
        growth = Fraction(orbit.norms[alpha - 1], norms0[alpha - 1])
        for m in m_values:
            if growth > Fraction(m):
                hits[m] += 1
    props = {m: hits[m] / n for m in m_values}
    return NormIncreaseResult(props, censored, n, c)


@dataclass
class OrbitTrace:
    nodes: list[int]
    sides: list[str]
    distributed: list[bool]
    halt: Optional[str]
    diameters: Optional[list[Fraction]] = None  # exact squared diameters


def trace_orbit(start: GeneralizedPermutation, widths: Sequence[int], steps: int, g: RauzyDiagram,
                c: float = 8.0, with_diameter: bool = False) -> OrbitTrace:
    ids = g.index()
    node_cache: dict[GeneralizedPermutation, int] = {}
    cf = Fraction(c).limit_denominator(10**6)
    orbit = Orbit(start, widths, track_matrix=with_diameter)

    def node(p):
        v = node_cache.get(p)
        if v is None:
            v = node_cache[p] = ids[canonical(p)]
        return v

    nodes, sides, dist = [node(orbit.perm)], [], [_below(orbit.norms, cf)]
    diams = [orbit.diameter_squared()] if with_diameter else None
    while orbit.n < steps:
        rec = orbit.advance()
        if rec is None:
            break
        sides.append(rec.winner_side)
        nodes.append(node(orbit.perm))
        dist.append(_below(orbit.norms, cf))
        if with_diameter:
            diams.append(orbit.diameter_squared())
    return OrbitTrace(nodes, sides, dist, orbit.halt, diams)


@dataclass
class NormalityResult:
    counts: dict
    min_count: int
    n_sequences: int
    halts: int
    distributed_stages: int


def normality_experiment(start: GeneralizedPermutation, k: int, n_orbits: int, steps: int, c: float,
                         seed: int) -> NormalityResult:
    """Occurrences of every length-``<= k`` split word right after a C-distributed stage."""
    g = build_diagram(start)
    sink = g.sink_of(g.node_of(start))
    if sink is None:
        raise ValueError("start type is not in a sink")
    counts = {(v, w): 0 for v in sorted(sink) for w in enumerate_sequences(g, v, k)}
    sampler = PolytopeSampler(configuration_space(start).polytope())
    bits = default_bits(steps)
    halts = distributed = 0
    for rng in substreams(seed, n_orbits):
        x = sampler.sample_exact(rng, bits)
        tr = trace_orbit(start, integer_widths(x), steps, g, c)
        halts += tr.halt is not None
        n_steps = len(tr.sides)
        for i, flag in enumerate(tr.distributed):
            if not flag:
                continue
            distributed += 1
            for length in range(1, k + 1):
                if i + length > n_steps:
                    break
                key = (tr.nodes[i], tuple(tr.sides[i:i + length]))
                if key in counts:
                    counts[key] += 1
    return NormalityResult(counts, min(counts.values()) if counts else 0, len(counts), halts, distributed)


@dataclass
class DiameterResult:
    checkpoints: tuple[int, ...]
    quantiles: dict  # checkpoint -> (q10, median, q90)
    violations: int
    shrink_checks: int = 0
    shrink_failures: int = 0
    medians: dict = field(default_factory=dict)


def diameter_decay_experiment(start: GeneralizedPermutation, n_orbits: int, steps: int, seed: int,
                              checkpoints: Sequence[int] = (50, 100, 200, 300), c: float = 8.0) -> DiameterResult:
    """Diameter of ``JQ_n(Delta)`` along sampled expansions.

    Diameters are compared exactly, so monotonicity is checked with no
    tolerance.  Also checks, at every C-distributed stage followed by the fixed positive
    word, that the diameter drops below ``R`` times its value.
    """
    g = build_diagram(start)
    pos = find_positive_sequence(canonical(start))
    q_pos = replay_winner_sequence(canonical(start), pos)
    pos_word = tuple(s for s in _sides_of(canonical(start), pos))
    r2 = Fraction(shrink_factor_bound(q_pos, c)) ** 2
    start_node = g.node_of(start)
    sampler = PolytopeSampler(configuration_space(start).polytope())
    bits = default_bits(steps)
    per_checkpoint = {n: [] for n in checkpoints}
    violations = checks = failures = 0
    for rng in substreams(seed, n_orbits):
        x = sampler.sample_exact(rng, bits)
        tr = trace_orbit(start, integer_widths(x), steps, g, c, with_diameter=True)
        dm = tr.diameters
        violations += sum(1 for a, b in zip(dm, dm[1:]) if b > a)
        for n in checkpoints:
            if n < len(dm):
                per_checkpoint[n].append(math.sqrt(dm[n]))
        L = len(pos_word)
        for i, flag in enumerate(tr.distributed):
            if flag and tr.nodes[i] == start_node and tuple(tr.sides[i:i + L]) == pos_word:
                checks += 1
                failures += not dm[i + L] < r2 * dm[i]
    quantiles = {n: tuple(float(v) for v in np.quantile(v_, [0.1, 0.5, 0.9])) if v_ else (math.nan,) * 3
                 for n, v_ in per_checkpoint.items()}
    return DiameterResult(tuple(checkpoints), quantiles, violations, checks, failures,
                          {n: q[1] for n, q in quantiles.items()})


def _sides_of(perm: GeneralizedPermutation, moves: Sequence[tuple[int, int]]):
    from .combinatorics import split_type, winner_side_of

    for w, l in moves:
        side = winner_side_of(perm, w, l)
        yield side
        perm, _ = split_type(perm, side)


@dataclass
class VisitResult:
    frequencies: dict
    stderr: dict


def visit_frequency_experiment(start: GeneralizedPermutation, n_orbits: int, steps: int, seed: int) -> VisitResult:
    """Long-run visit frequencies of the types in the start's diagram, with across-orbit standard errors."""
    g = build_diagram(start)
    sampler = PolytopeSampler(configuration_space(start).polytope())
    bits = default_bits(steps)
    per_orbit = []
    for rng in substreams(seed, n_orbits):
        x = sampler.sample_exact(rng, bits)
        tr = trace_orbit(start, integer_widths(x), steps, g)
        c = Counter(tr.nodes)
        total = len(tr.nodes)
        per_orbit.append({v: c[v] / total for v in range(len(g.nodes))})
    freqs, errs = {}, {}
    for v in range(len(g.nodes)):
        vals = np.array([o[v] for o in per_orbit])
        freqs[v] = float(vals.mean())
        errs[v] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return VisitResult(freqs, errs)
