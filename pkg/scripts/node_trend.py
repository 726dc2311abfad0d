"""Node counts of big-M and P-split branch-and-bound on seeded clustering instances.

Writes one comparison CSV with a row per (seed, formulation, P) and prints
the median node count per column. Usage:

    python3 scripts/node_trend.py [--seeds 5] [--points 6] [--dim 8] [--out results/node_trend.csv]
"""

import argparse
import statistics
from pathlib import Path

from psplit.experiments import run_compare, write_comparison_csv
from psplit.problems import gen_kmeans, random_clusters
from psplit.solver import SolverOptions


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--points", type=int, default=6)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--clusters", type=int, default=2)
    ap.add_argument("--splits", type=lambda s: [int(v) for v in s.split(",")], default=[2, 4, 8])
    ap.add_argument("--time-limit-s", type=float, default=600.0)
    ap.add_argument("--out", type=Path, default=Path("results/node_trend.csv"))
    args = ap.parse_args()
    args.out.parent.mkdir(parents=True, exist_ok=True)

    rows = []
    for seed in range(args.seeds):
        inst = gen_kmeans(random_clusters(seed, args.points, args.dim, args.clusters), f"kmeans-{seed}")
        parts = {P: inst.partitions(P) for P in args.splits}
        for r in run_compare(inst.model, ["bigm", "psplit"], parts,
                             SolverOptions(time_limit_s=args.time_limit_s), inst.bound_rule):
            rows.append(r)
            print(f"{r.instance} {r.formulation} P={r.P}: {r.nodes} nodes, "
                  f"{r.wall_time:.1f} s, {r.status}", flush=True)
    write_comparison_csv(rows, args.out)
    for key in [("bigm", 1)] + [("psplit", P) for P in args.splits]:
        counts = [r.nodes for r in rows if (r.formulation, r.P) == key]
        print(f"median nodes {key[0]} P={key[1]}: {statistics.median(counts)}")


if __name__ == "__main__":
    main()
