"""Quantiles of the projective diameter of the expansion simplex along sampled orbits."""

import argparse
from pathlib import Path

from rauzylab.io import load_type, write_csv
from rauzylab.montecarlo import diameter_decay_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--type", default='{"top": [2, 2, 1, 1], "bottom": [4, 4, 3, 3]}')
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--orbits", type=int, default=500)
    ap.add_argument("--checkpoints", type=int, nargs="+", default=[50, 100, 200, 300])
    ap.add_argument("--out", type=Path, default=Path("results/diameter_decay.csv"))
    args = ap.parse_args()

    cps = tuple(sorted(args.checkpoints))
    res = diameter_decay_experiment(load_type(args.type), args.orbits, cps[-1], seed=args.seed, checkpoints=cps)
    rows = [[n, *(f"{v:.6e}" for v in res.quantiles[n])] for n in cps]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, {"seed": args.seed, "orbits": args.orbits}, ["n", "q10", "median", "q90"], rows)
    ratio = res.medians[cps[0]] / res.medians[cps[-1]]
    print(f"violations {res.violations}, median ratio n={cps[0]}->{cps[-1]}: {ratio:.3g}; wrote {args.out}")
    return int(res.violations > 0)


if __name__ == "__main__":
    raise SystemExit(main())
