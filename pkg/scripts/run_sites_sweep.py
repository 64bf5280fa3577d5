#!/usr/bin/env python3
"""Site-count experiment: hold the representative budget fixed and sweep the
number of local sites, writing a plot-ready CSV.

Example:
    python scripts/run_sites_sweep.py --kind B --seed 20260809 \
        --fraction 0.13 --sites 2,4,8,12 --out sites_B.csv
"""

import argparse

from distclust import CLUSTER_PARAMS
from distclust.datagen import dataset_spec
from distclust.pipeline import ExperimentConfig, sweep, write_sweep_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", default="B", choices=["A", "B", "C"])
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--fraction", type=float, default=0.13)
    parser.add_argument("--sites", default="2,4,8,12")
    parser.add_argument("--out", default="sites.csv")
    args = parser.parse_args()

    site_counts = [int(v) for v in args.sites.split(",") if v]
    params = CLUSTER_PARAMS[args.kind]
    cfg = ExperimentConfig(
        dataset=dataset_spec(args.kind, seed=args.seed),
        n_sites=site_counts[0], epsilon=params.epsilon, min_pts=params.min_pts,
        budgets=(args.fraction,), seed=args.seed,
    )
    rows = sweep(cfg, fractions=[args.fraction], site_counts=site_counts)
    for row in rows:
        print(f"sites={row.n_sites:<3d} quality={row.quality:.4f} "
              f"bytes={row.bytes:>9d} cpu={row.cpu_time:.2f}s")
    write_sweep_csv(rows, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
