"""Count split words that follow a C-distributed stage along sampled orbits."""

import argparse
from pathlib import Path

from rauzylab.io import load_type, write_csv
from rauzylab.montecarlo import normality_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--type", default='{"top": [2, 2, 1, 1], "bottom": [4, 4, 3, 3]}')
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--orbits", type=int, default=200)
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--c", type=float, default=8.0)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--out", type=Path, default=Path("results/normality.csv"))
    args = ap.parse_args()

    res = normality_experiment(load_type(args.type), args.k, args.orbits, args.steps, args.c, seed=args.seed)
    rows = [[node, " ".join(word), count] for (node, word), count in sorted(res.counts.items())]
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, {"seed": args.seed, "orbits": args.orbits, "steps": args.steps, "C": args.c, "k": args.k},
              ["node", "word", "count"], rows)
    print(f"{res.n_sequences} words, min count {res.min_count}, "
          f"{res.distributed_stages} distributed stages; wrote {args.out}")
    return int(res.min_count == 0)


if __name__ == "__main__":
    raise SystemExit(main())
