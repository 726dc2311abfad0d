import csv
import dataclasses
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from psplit.experiments import (ComparisonRow, _flag_discrepancies, comparison_csv, grid_csv, grid_points, project_grid,
                                run_compare)
from psplit.problems import gen_example1, gen_kmeans, random_affine_disjunction, random_clusters
from psplit.reformulate import build


def test_compare_rows_and_labels(tight):
    inst = gen_kmeans(random_clusters(0, 3, 2, 2))
    rows = run_compare(inst.model, ["bigm", "psplit", "psplit-nonext", "hull"],
                       {P: inst.partitions(P) for P in (1, 2)}, tight, inst.bound_rule)
    assert [(r.formulation, r.P) for r in rows] == [
        ("bigm", 1), ("psplit", 1), ("psplit", 2), ("psplit-nonext", 1), ("psplit-nonext", 2), ("hull", 0)]
    good = [r for r in rows if r.status == "optimal"]
    assert len(good) == 5
    assert rows[-1].status.startswith("error:")
    assert max(r.mip for r in good) - min(r.mip for r in good) <= 1e-6
    assert all(r.consistent() for r in rows)


def test_discrepancies_are_flagged(tight):
    m = random_affine_disjunction(np.random.default_rng(0), 3)
    rows = run_compare(m, ["bigm", "hull"], None, tight)
    assert all(r.status == "optimal" for r in rows)
    rows[0].mip -= 1.0
    _flag_discrepancies(rows)
    assert [r.status for r in rows] == ["optimal", "discrepancy"]


def test_relaxation_only_mode():
    m = random_affine_disjunction(np.random.default_rng(1), 3)
    (row,) = run_compare(m, ["bigm"], None, solve_mip=False)
    assert math.isnan(row.mip) and row.nodes == 0 and math.isfinite(row.relaxation)


def test_comparison_csv_header_follows_fields():
    row = ComparisonRow("i", "bigm", 1, 3, 2, 4, -1.5, -1.0, 7, 20, 0.01, "optimal")
    out = list(csv.reader(io.StringIO(comparison_csv([row]))))
    assert out[0] == [f.name for f in dataclasses.fields(ComparisonRow)]
    assert out[1][:3] == ["i", "bigm", "1"] and float(out[1][6]) == -1.5


def test_grid_points():
    assert grid_points(-1, 4, 41)[20] == 1.5
    assert grid_points(0, 2, 1).tolist() == [1.0]
    for bad in ((1, 0, 3), (0, 0, 2), (0, 1, 0)):
        with pytest.raises(ValueError):
            grid_points(*bad)


def test_projection_of_two_balls():
    inst = gen_example1()
    f = build(inst.model, "psplit", inst.partitions(2), inst.bound_rule)
    cells = project_grid(f, (0, 1), ((-1, 4), (-1, 4)), 11)
    assert len(cells) == 121
    feas = {(c.x_i, c.x_j): c.feasible for c in cells}
    assert feas[(0.0, 0.0)] and feas[(3.0, 3.0)]
    assert not feas[(4.0, -1.0)]
    text = grid_csv(cells, ("x0", "x1"))
    assert text.splitlines()[0] == "x0,x1,feasible"
    assert text.splitlines()[1].endswith(",0") or text.splitlines()[1].endswith(",1")
    with pytest.raises(ValueError):
        project_grid(f, (0, 0), ((-1, 4), (-1, 4)), 3)


@pytest.mark.parametrize("P", [1, 2, 4])
def test_two_ball_grid_matches_frozen_oracle(P):
    frozen = json.loads((Path(__file__).parent / "data" / "derived.json").read_text())
    inst = gen_example1()
    f = build(inst.model, "psplit", inst.partitions(P), inst.bound_rule)
    got = [int(c.feasible) for c in project_grid(f, (0, 1), ((-1, 4), (-1, 4)), 11)]
    assert got == [v for row in frozen["ex1_grid_11"][str(P)] for v in row]
