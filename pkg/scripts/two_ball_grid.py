"""Feasible region of the two-ball example's P-split relaxations.

Writes one grid CSV per P (x0, x1, feasible) and prints a coarse text
picture of each region. Usage:

    python3 scripts/two_ball_grid.py [--resolution 41] [--out-dir results]
"""

import argparse
from pathlib import Path

from psplit.experiments import project_grid, write_grid_csv
from psplit.problems import gen_example1
from psplit.reformulate import build


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=41)
    ap.add_argument("--splits", type=lambda s: [int(v) for v in s.split(",")], default=[1, 2, 4])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    inst = gen_example1()
    res = args.resolution
    for P in args.splits:
        f = build(inst.model, "psplit", inst.partitions(P), inst.bound_rule)
        cells = project_grid(f, (0, 1), ((-1.0, 4.0), (-1.0, 4.0)), res)
        path = write_grid_csv(cells, args.out_dir / f"two_ball_P{P}.csv", ("x0", "x1"))
        print(f"P={P}: {sum(c.feasible for c in cells)} of {len(cells)} cells feasible -> {path}")
        # x1 grows upwards, x0 to the right
        for row in reversed(range(res)):
            print("".join("#" if cells[col * res + row].feasible else "." for col in range(res)))
        print()


if __name__ == "__main__":
    main()
