"""Comparison runs across formulations and relaxation grid projections."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bounds import BoundRule
from .model import DisjunctiveModel
from .partition import Partition
from .reformulate import FlatMip, build, formulation_stats, relaxed_copy
from .solver import (SolverOptions, branch_and_bound, compile_mip, interior_point,
                     relax_compiled, solve_relaxation)
from .simplex import OPTIMAL

__all__ = [
    "ComparisonRow", "GridCell", "run_compare", "project_grid", "grid_points",
    "write_comparison_csv", "write_grid_csv", "comparison_csv", "grid_csv",
]

SPLIT_FORMULATIONS = ("psplit", "psplit-nonext")
AGREE_TOL = 1e-6


@dataclass
class ComparisonRow:
    instance: str
    formulation: str
    P: int
    continuous: int
    binaries: int
    rows: int
    relaxation: float
    mip: float
    nodes: int
    lp_iterations: int
    wall_time: float
    status: str

    def consistent(self, tol: float = 1e-6) -> bool:
        """Relaxation bound does not exceed the MIP optimum (minimisation)."""
        if not (math.isfinite(self.relaxation) and math.isfinite(self.mip)):
            return True
        return self.relaxation <= self.mip + tol * max(1.0, abs(self.mip))


@dataclass(frozen=True)
class GridCell:
    x_i: float
    x_j: float
    feasible: bool


def _one_row(model, instance_id, formulation, P, partitions, rule, options, solve_mip):
    t0 = time.perf_counter()
    f = build(model, formulation, partitions, rule)
    st = formulation_stats(f)
    relax = solve_relaxation(f, options)
    rel_value = relax.objective if relax.status == OPTIMAL else math.nan
    mip, nodes, iters, status = math.nan, 0, relax.iterations, relax.status
    if solve_mip:
        rep = branch_and_bound(f, options)
        mip, nodes, status = rep.objective, rep.nodes, rep.status
        iters += rep.lp_iterations
    return ComparisonRow(
        instance_id, formulation, P, st.continuous, st.binary,
        st.linear_rows + st.convex_rows, rel_value, mip, nodes, iters,
        time.perf_counter() - t0, status,
    )


def run_compare(model: DisjunctiveModel, formulations: Sequence[str],
                partitions: Mapping[int, list[Partition]] | None = None,
                options: SolverOptions | None = None, rule: BoundRule | None = None,
                instance_id: str | None = None, solve_mip: bool = True) -> list[ComparisonRow]:
    """One row per formulation, and per ``P`` for the split formulations.

    ``partitions`` maps ``P`` to the per-disjunction partitions used for it.
    Big-M rows report ``P = 1`` and hull rows ``P = 0``. A failing row keeps
    its error in ``status`` and the run goes on. When MIP optima of
    successful rows disagree, the rows off the smallest optimum get the
    status ``discrepancy``.
    """
    opts = options or SolverOptions()
    name = instance_id or model.name
    partitions = dict(partitions or {})
    rows: list[ComparisonRow] = []
    for form in formulations:
        if form in SPLIT_FORMULATIONS:
            if not partitions:
                raise ValueError(f"{form} needs at least one partition set")
            jobs = [(P, parts) for P, parts in sorted(partitions.items())]
        else:
            jobs = [(1 if form == "bigm" else 0, None)]
        for P, parts in jobs:
            try:
                rows.append(_one_row(model, name, form, P, parts, rule, opts, solve_mip))
            except Exception as exc:  # recorded per row, the run continues
                rows.append(ComparisonRow(name, form, P, 0, 0, 0, math.nan, math.nan, 0, 0,
                                          0.0, f"error: {exc}"))
    if solve_mip:
        _flag_discrepancies(rows)
    return rows


def _flag_discrepancies(rows: list[ComparisonRow]) -> None:
    good = [r for r in rows if r.status == "optimal"]
    if not good:
        return
    best = min(r.mip for r in good)
    for r in good:
        if abs(r.mip - best) > AGREE_TOL * max(1.0, abs(best)):
            r.status = "discrepancy"


def grid_points(lo: float, hi: float, resolution: int) -> np.ndarray:
    """``resolution`` evenly spaced points covering ``[lo, hi]`` with both ends.

    A single point sits at the centre of the window.
    """
    if resolution < 1 or hi < lo or (hi == lo and resolution > 1):
        raise ValueError(f"empty grid window [{lo}, {hi}] at resolution {resolution}")
    if resolution == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(lo, hi, resolution)


def project_grid(f: FlatMip, dims: tuple[int, int], window, resolution,
                 options: SolverOptions | None = None) -> list[GridCell]:
    """Feasibility of the continuous relaxation of ``f`` on a grid over two variables.

    ``window`` is ``((lo_i, hi_i), (lo_j, hi_j))`` and ``resolution`` an int
    or a pair. At each point ``x_i`` and ``x_j`` are fixed, the other
    variables range over their boxes, binaries are relaxed and the objective
    is dropped; the cell is feasible iff that relaxation solves to optimality.
    Cells run row by row over ``x_i`` with ``x_j`` varying fastest.
    """
    i, j = (int(d) for d in dims)
    n = len(f.variables)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"grid needs two distinct variables in range, got {dims}")
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    (lo_i, hi_i), (lo_j, hi_j) = window
    xs = grid_points(lo_i, hi_i, resolution[0])
    ys = grid_points(lo_j, hi_j, resolution[1])
    opts = options or SolverOptions()
    g = relaxed_copy(f)
    g.objective = {}
    g.objective_constant = 0.0
    cm = compile_mip(g)
    inner = interior_point(cm, opts)
    cells = []
    for a in xs:
        for b in ys:
            lb, ub = cm.lb.copy(), cm.ub.copy()
            lb[i] = max(lb[i], a)
            ub[i] = min(ub[i], a)
            lb[j] = max(lb[j], b)
            ub[j] = min(ub[j], b)
            res = relax_compiled(cm, lb, ub, opts, inner)
            cells.append(GridCell(float(a), float(b), res.status == OPTIMAL))
    return cells


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def comparison_csv(rows: Iterable[ComparisonRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([fl.name for fl in dataclasses.fields(ComparisonRow)])
    for r in rows:
        w.writerow([_fmt(v) for v in dataclasses.astuple(r)])
    return buf.getvalue()


def grid_csv(cells: Iterable[GridCell], names: tuple[str, str] = ("x_i", "x_j")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([names[0], names[1], "feasible"])
    for c in cells:
        w.writerow([repr(c.x_i), repr(c.x_j), int(c.feasible)])
    return buf.getvalue()


def write_comparison_csv(rows: Iterable[ComparisonRow], path) -> Path:
    path = Path(path)
    path.write_text(comparison_csv(rows))
    return path


def write_grid_csv(cells: Iterable[GridCell], path, names: tuple[str, str] = ("x_i", "x_j")) -> Path:
    path = Path(path)
    path.write_text(grid_csv(cells, names))
    return path
