"""Command-line entry point.

Exit codes: 0 success, 1 gate or assertion failure, 2 invalid type,
3 inadmissible widths.  Argument errors exit 2 through argparse.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .combinatorics import GeneralizedPermutation, validate_type
from .diagram import build_diagram
from .expansion import DEFAULT_THRESHOLDS, InadmissibleWidths, RunSummary, check_admissible, run
from .io import fraction_str, jsonl_line, load_type, parse_widths
from . import reference_stage
from .suite import SuiteConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_TYPE, EXIT_WIDTHS = 0, 1, 2, 3


class InvalidType(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    type: Optional[str] = None
    widths: Optional[str] = None
    seed: int = 0
    n_samples: int = 10_000
    steps: int = 1000
    orbits: int = 50
    c_thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    m_values: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 64.0)
    k: int = 3
    alpha: Optional[int] = None
    n_range: str = "1-20"
    out: Path = Path(".")
    format: Optional[str] = None

    def __post_init__(self):
        self.out = Path(self.out).resolve()

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def _seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("RAUZYLAB_SEED")
    return int(env) if env else 0


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _load_valid_type(spec: Optional[str]) -> GeneralizedPermutation:
    if spec is None:
        raise InvalidType("--type is required")
    try:
        perm = load_type(spec)
    except (ValueError, TypeError, OSError) as e:
        raise InvalidType(f"cannot read type: {e}") from e
    report = validate_type(perm)
    if not report.valid:
        raise InvalidType("invalid type: " + "; ".join(report.problems))
    return perm


def _parse_range(text: str) -> list[int]:
    lo, _, hi = text.partition("-")
    lo_i = int(lo)
    return list(range(lo_i, int(hi) + 1)) if hi else [lo_i]


def cmd_diagram(cfg: RunConfig) -> int:
    perm = _load_valid_type(cfg.type)
    g = build_diagram(perm)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "diagram.dot").write_text(g.to_dot())
    (cfg.out / "diagram.json").write_text(g.to_json())
    sinks = {"sinks": [sorted(s) for s in g.sinks], "seed_node": g.node_of(perm)}
    (cfg.out / "sinks.json").write_text(json.dumps(sinks, indent=2, sort_keys=True) + "\n")
    if cfg.format == "dot":
        sys.stdout.write(g.to_dot())
    elif cfg.format == "json":
        sys.stdout.write(g.to_json())
    else:
        print(f"{len(g.nodes)} nodes, {len(g.edges)} edges, {len(g.sinks)} sinks -> {cfg.out}")
    return EXIT_OK


def cmd_orbit(cfg: RunConfig) -> int:
    perm = _load_valid_type(cfg.type)
    if cfg.widths is None:
        raise InadmissibleWidths("--widths is required")
    try:
        widths = parse_widths(cfg.widths)
    except (ValueError, ZeroDivisionError) as e:
        raise InadmissibleWidths(f"cannot parse widths: {e}") from e
    check_admissible(perm, widths)
    total = sum(widths, Fraction(0))
    widths = [w / total for w in widths]
    g = build_diagram(perm)
    ids = g.index()
    header = {
        "record": "header",
        "type": perm.to_dict(),
        "widths": [fraction_str(w) for w in widths],
        "steps": cfg.steps,
        "c_thresholds": list(cfg.c_thresholds),
        "seed": cfg.seed,
        "type_ids": {str(p): i for p, i in ids.items()},
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / "trace.jsonl"
    summary = RunSummary()
    with path.open("w") as f:
        f.write(jsonl_line(header))
        if cfg.steps > 0:
            for rep in run(perm, widths, cfg.steps, cfg.c_thresholds, True, ids, summary):
                f.write(jsonl_line({"record": "stage", **rep.to_record()}))
            if summary.halt is not None:
                f.write(jsonl_line({"record": "halt", "n": summary.steps, "reason": summary.halt}))
    print(f"{summary.steps} splits, halt={summary.halt} -> {path}")
    return EXIT_OK


def cmd_reference_stage(cfg: RunConfig) -> int:
    ns = _parse_range(cfg.n_range)
    if min(ns) < 1:
        print("error: the reference family needs n >= 1", file=sys.stderr)
        return EXIT_FAIL
    for n in ns:
        rep = reference_stage.check(n)
        if not rep.ok:
            print(f"FAIL {rep.failures[0]}")
            return EXIT_FAIL
        v = rep.values
        print(f"ok n={n} p={v['probability']} quad={v['quad_area']:.6e} tri={v['triangle_area']:.6e} "
              f"growth={v['growth_factor']} ratio={v['elementary_ratio']}")
    return EXIT_OK


def cmd_experiments(cfg: RunConfig) -> int:
    perm = _load_valid_type(cfg.type)
    suite_cfg = SuiteConfig(seed=cfg.seed, n_samples=cfg.n_samples, max_steps=cfg.steps,
                            c_thresholds=cfg.c_thresholds, m_values=cfg.m_values, k=cfg.k,
                            alpha=cfg.alpha, orbits=cfg.orbits)
    write_tables = cfg.format in (None, "csv")
    summary, timings = run_suite(perm, suite_cfg, cfg.out if write_tables else None)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for name, gate in summary["gates"].items():
        print(f"{'PASS' if gate['passed'] else 'FAIL'} {name} ({timings[name]:.1f}s)")
    return EXIT_OK if summary["passed"] else EXIT_FAIL


COMMANDS = {
    "diagram": cmd_diagram,
    "orbit": cmd_orbit,
    "reference-stage": cmd_reference_stage,
    "experiments": cmd_experiments,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rauzylab", description="Rauzy induction for non-classical interval exchanges")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats):
        sp.add_argument("--out", type=Path, help="output directory (default: current)")
        sp.add_argument("--format", choices=formats, default=None)
        sp.add_argument("--config", type=Path, help="JSON file of RunConfig fields; flags override it")

    d = sub.add_parser("diagram", help="reduced Rauzy diagram, sinks, DOT/JSON export")
    d.add_argument("--type", help="inline JSON {'top': [...], 'bottom': [...]} or a file")
    common(d, ["json", "dot"])

    o = sub.add_parser("orbit", help="JSONL trace of an expansion")
    o.add_argument("--type")
    o.add_argument("--widths", help="comma-separated exact rationals, e.g. 10/17,7/17")
    o.add_argument("--steps", type=int)
    o.add_argument("--seed", type=int)
    o.add_argument("--c-thresholds", type=_floats)
    common(o, ["jsonl"])

    r = sub.add_parser("reference-stage", help="verify the four-band reference family of stages")
    r.add_argument("--n-range", help="n or lo-hi (default 1-20)")
    common(r, ["json"])

    e = sub.add_parser("experiments", help="Monte Carlo suite with pass/fail gates")
    e.add_argument("--type")
    e.add_argument("--seed", type=int)
    e.add_argument("--n-samples", "--N", dest="n_samples", type=int)
    e.add_argument("--steps", type=int)
    e.add_argument("--orbits", type=int)
    e.add_argument("--c-thresholds", type=_floats)
    e.add_argument("--m-values", type=_floats)
    e.add_argument("--k", type=int)
    e.add_argument("--alpha", type=int)
    common(e, ["json", "csv"])
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if getattr(args, "config", None) is not None:
        data.update(json.loads(Path(args.config).read_text()))
    for k, v in vars(args).items():
        if k != "config" and v is not None:
            data[k] = v
    data["seed"] = _seed(data.get("seed"))
    for k in ("c_thresholds", "m_values"):
        if k in data:
            data[k] = tuple(data[k])
    return RunConfig.from_mapping(data)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg)
    except InvalidType as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TYPE
    except InadmissibleWidths as e:
        print(f"error: inadmissible widths: {e}", file=sys.stderr)
        return EXIT_WIDTHS
    except ValueError as e:
        parser.error(str(e))


if __name__ == "__main__":
    sys.exit(main())
