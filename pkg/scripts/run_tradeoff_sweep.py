#!/usr/bin/env python3
"""Quality/cost trade-off experiment: sweep the representative budget on one
dataset at a fixed site count and write a plot-ready CSV.

Example:
    python scripts/run_tradeoff_sweep.py --kind A --seed 20260809 \
        --fractions 0.01,0.02,0.05,0.1,0.2 --sites 4 --out tradeoff_A.csv
"""

import argparse

from distclust import CLUSTER_PARAMS
from distclust.datagen import dataset_spec
from distclust.pipeline import ExperimentConfig, sweep, write_sweep_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", default="A", choices=["A", "B", "C"])
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--sites", type=int, default=4)
    parser.add_argument("--fractions", default="0.01,0.02,0.05,0.1,0.2")
    parser.add_argument("--out", default="tradeoff.csv")
    args = parser.parse_args()

    fractions = [float(v) for v in args.fractions.split(",") if v]
    params = CLUSTER_PARAMS[args.kind]
    cfg = ExperimentConfig(
        dataset=dataset_spec(args.kind, seed=args.seed),
        n_sites=args.sites, epsilon=params.epsilon, min_pts=params.min_pts,
        budgets=tuple(fractions), seed=args.seed,
    )
    rows = sweep(cfg, fractions=fractions, site_counts=[args.sites])
    for row in rows:
        print(f"fraction={row.fraction:<5g} quality={row.quality:.4f} "
              f"bytes={row.bytes:>9d} speedup={row.speedup:7.2f} cpu={row.cpu_time:.2f}s")
    write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
