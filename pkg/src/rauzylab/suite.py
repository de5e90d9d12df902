"""The experiment suite behind ``rauzylab experiments``: runs each experiment, writes CSVs, evaluates gates."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .combinatorics import TOP, GeneralizedPermutation
from .diagram import build_diagram, successors
from .io import fraction_str, write_csv
from .montecarlo import (
    ExperimentConfig,
    Stage,
    diameter_decay_experiment,
    estimate_split_probability,
    norm_increase_experiment,
    normality_experiment,
    random_stage,
    substreams,
    visit_frequency_experiment,
)

SIGMA_GATE = 4.0


@dataclass
class SuiteConfig(ExperimentConfig):
    orbits: int = 50
    n_stages: int = 5
    max_stage_length: int = 12
    checkpoints: tuple[int, ...] = (50, 100, 200, 300)

    def __post_init__(self):
        super().__post_init__()
        if self.orbits < 1 or self.n_stages < 0:
            raise ValueError("orbits must be at least 1 and n_stages nonnegative")


@dataclass
class Gate:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def _header(cfg: SuiteConfig, **extra) -> dict:
    h = {
        "seed": cfg.seed,
        "N": cfg.n_samples,
        "C": ",".join(f"{c:g}" for c in cfg.c_thresholds),
        "M": ",".join(f"{m:g}" for m in cfg.m_values),
        "k": cfg.k,
    }
    h.update(extra)
    return h


def split_probability_gate(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path]) -> Gate:
    """Importance-sampled split frequencies against exact rationals on random stages.

    Stage 0 is always the starting stage itself; the others follow random
    feasible split paths.
    """
    rngs = substreams(cfg.seed, 2 * (cfg.n_stages + 1))
    rows, worst = [], 0.0
    for i in range(cfg.n_stages + 1):
        length = 0 if i == 0 else int(rngs[2 * i].integers(1, cfg.max_stage_length + 1))
        stage = random_stage(perm, length, rngs[2 * i])
        if not any(side == TOP for side, _, _ in successors(stage.perm)):
            side = "bottom"
        else:
            side = TOP
        est = estimate_split_probability(stage, cfg.n_samples, rngs[2 * i + 1], side)
        worst = max(worst, est.z)
        rows.append([i, len(stage.moves), side, est.value, est.stderr, fraction_str(est.exact), est.z])
    if out is not None:
        write_csv(out / "split_probability.csv", _header(cfg),
                  ["stage", "length", "side", "estimate", "stderr", "exact", "z"], rows)
    return Gate("split_probability", worst < SIGMA_GATE, {"max_z": worst, "stages": len(rows)})


def normality_gate(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path]) -> Gate:
    c = max(cfg.c_thresholds)
    res = normality_experiment(perm, cfg.k, cfg.orbits, cfg.max_steps, c, cfg.seed)
    if out is not None:
        rows = [[v, " ".join(w), n] for (v, w), n in sorted(res.counts.items())]
        write_csv(out / "normality.csv", _header(cfg, orbits=cfg.orbits, steps=cfg.max_steps, C_used=f"{c:g}"),
                  ["node", "word", "count"], rows)
    return Gate("normality", res.min_count > 0,
                {"min_count": res.min_count, "sequences": res.n_sequences, "C": c, "halts": res.halts})


def diameter_gate(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path]) -> Gate:
    steps = max(cfg.checkpoints)
    c = max(cfg.c_thresholds)
    res = diameter_decay_experiment(perm, cfg.orbits, steps, cfg.seed, cfg.checkpoints, c)
    med = [res.medians[n] for n in cfg.checkpoints]
    decreasing = all(b < a for a, b in zip(med, med[1:]) if not (np.isnan(a) or np.isnan(b)))
    if out is not None:
        rows = [[n, *res.quantiles[n]] for n in cfg.checkpoints]
        write_csv(out / "diameter.csv", _header(cfg, orbits=cfg.orbits, C_used=f"{c:g}"),
                  ["n", "q10", "median", "q90"], rows)
    ok = res.violations == 0 and decreasing and res.shrink_failures == 0
    return Gate("diameter_decay", ok, {"violations": res.violations, "medians_decreasing": decreasing,
                                       "shrink_checks": res.shrink_checks, "shrink_failures": res.shrink_failures})


def norm_increase_report(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path]) -> Gate:
    """Report-only, apart from the sanity requirement that proportions decrease in ``M``."""
    alpha = cfg.alpha if cfg.alpha is not None else 1
    res = norm_increase_experiment(Stage(perm), alpha, cfg.m_values, cfg.orbits, cfg.max_steps, cfg.seed)
    ms = sorted(cfg.m_values)
    monotone = all(res.proportions[b] <= res.proportions[a] for a, b in zip(ms, ms[1:]))
    if out is not None:
        write_csv(out / "norm_increase.csv", _header(cfg, alpha=alpha, orbits=cfg.orbits),
                  ["M", "proportion", "censored"], [[f"{m:g}", res.proportions[m], res.censored] for m in ms])
    return Gate("norm_increase_monotone", monotone,
                {"alpha": alpha, "censored": res.censored,
                 "proportions": {f"{m:g}": res.proportions[m] for m in ms}})


def visit_report(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path]) -> Gate:
    """Two independent seeds must agree within the sigma gate per node."""
    a = visit_frequency_experiment(perm, cfg.orbits, cfg.max_steps, cfg.seed)
    b = visit_frequency_experiment(perm, cfg.orbits, cfg.max_steps, cfg.seed + 1)
    worst = 0.0
    rows = []
    for v in sorted(a.frequencies):
        se = float(np.hypot(a.stderr[v], b.stderr[v]))
        diff = abs(a.frequencies[v] - b.frequencies[v])
        z = diff / se if se > 0 else (0.0 if diff < 1e-12 else float("inf"))
        worst = max(worst, z)
        rows.append([v, a.frequencies[v], a.stderr[v], b.frequencies[v], b.stderr[v], z])
    total = sum(a.frequencies.values())
    if out is not None:
        write_csv(out / "visits.csv", _header(cfg, orbits=cfg.orbits, steps=cfg.max_steps),
                  ["node", "freq_a", "se_a", "freq_b", "se_b", "z"], rows)
    return Gate("visit_seed_agreement", worst < SIGMA_GATE and abs(total - 1) < 1e-9,
                {"max_z": worst, "total": total})


def run_suite(perm: GeneralizedPermutation, cfg: SuiteConfig, out: Optional[Path] = None) -> tuple[dict, dict]:
    """Summary (deterministic given the config) and per-experiment wall times."""
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    g = build_diagram(perm)
    in_sink = g.sink_of(g.node_of(perm)) is not None
    gates, timings = [], {}
    jobs = [split_probability_gate, diameter_gate, norm_increase_report]
    if in_sink:
        jobs += [normality_gate, visit_report]
    for job in jobs:
        t = time.perf_counter()
        gates.append(job(perm, cfg, out))
        timings[gates[-1].name] = time.perf_counter() - t
    summary = {
        "type": perm.to_dict(),
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()},
        "in_sink": in_sink,
        "gates": {gt.name: {"passed": gt.passed, **gt.detail} for gt in gates},
        "passed": all(gt.passed for gt in gates),
    }
    return summary, timings
