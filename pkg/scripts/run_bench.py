"""Desk-scale sweep over the three families: cuts off vs on, averaged per lambda.

    python scripts/run_bench.py --n 10 --instances 5 --jobs 4 --out results/
"""

import argparse
import math
from pathlib import Path

from polarsfm.cli import bench_csv, format_table, run_bench
from polarsfm.instances import GENERATORS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--families", default=",".join(GENERATORS))
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--lambdas", default="0,0.2,0.4,0.6,0.8,1.0")
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument("--omega", type=float, default=1.0)
    ap.add_argument("--time-limit", type=float, default=math.inf)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, help="directory for one CSV per family")
    args = ap.parse_args()

    lambdas = [float(t) for t in args.lambdas.split(",")]
    for family in args.families.split(","):
        rows, runs = run_bench(family, args.n, args.instances, lambdas, args.seed_base, args.omega,
                               args.jobs, time_limit=args.time_limit)
        print(f"\n{family}, n={args.n}, {args.instances} instances per lambda")
        for r in runs:
            if r.error:
                print(f"# lambda={r.lam} seed={r.seed}: {r.error}")
        print(format_table(rows))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{family}_n{args.n}.csv").write_text(bench_csv(rows))


if __name__ == "__main__":
    main()
