"""Recompute the frozen reference values in tests/data/derived.json.

Everything here goes through the independent oracles in tests/oracles.py
(cvxpy / HiGHS / enumeration), never through the package's own builders or
solver. Run from the repository root:  python3 scripts/derive_oracles.py
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracles import ex1_split_feasible, kmeans_optimum  # noqa: E402
from psplit.problems import random_clusters  # noqa: E402

COARSE = 11


def main():
    out = {"ex1_point_1.5_1.5": {}, "ex1_grid_11": {}, "kmeans_trend_optima": {}}
    for P in (1, 2, 4):
        out["ex1_point_1.5_1.5"][str(P)] = ex1_split_feasible(P, (1.5, 1.5))
        xs = np.linspace(-1.0, 4.0, COARSE)
        out["ex1_grid_11"][str(P)] = [[int(ex1_split_feasible(P, (a, b))) for b in xs] for a in xs]
        print(P, out["ex1_point_1.5_1.5"][str(P)], sum(map(sum, out["ex1_grid_11"][str(P)])), flush=True)
    for seed in range(5):
        ci = random_clusters(seed, 6, 8, 2)
        out["kmeans_trend_optima"][str(seed)] = kmeans_optimum(ci.points, 2)
    path = ROOT / "tests" / "data" / "derived.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
