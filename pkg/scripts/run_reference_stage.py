"""Tabulate the reference stage family against its closed forms."""

import argparse
from pathlib import Path

from rauzylab import reference_stage as ref
from rauzylab.io import fraction_str, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=20)
    ap.add_argument("--out", type=Path, default=Path("results/reference_stage.csv"))
    args = ap.parse_args()

    rows, bad = [], 0
    for n in range(1, args.n_max + 1):
        rep = ref.check(n)
        bad += not rep.ok
        v = rep.values
        rows.append([n, fraction_str(v["probability"]), f"{v['quad_area']:.17g}", f"{ref.quad_area(n):.17g}",
                     f"{v['triangle_area']:.17g}", f"{ref.triangle_area(n):.17g}",
                     fraction_str(ref.growth_factor(n)), int(rep.ok)])
        for msg in rep.failures:
            print(msg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(args.out, {"n_max": args.n_max},
              ["n", "probability", "quad_area", "quad_closed_form", "triangle_area", "triangle_closed_form",
               "growth_factor", "ok"], rows)
    print(f"{args.n_max - bad}/{args.n_max} stages match; wrote {args.out}")
    return int(bad > 0)


if __name__ == "__main__":
    raise SystemExit(main())
