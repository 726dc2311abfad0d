"""Command-line front end.

Subcommands: ``gen``, ``formulate``, ``relax``, ``solve``, ``compare``,
``grid`` and ``export``. Exit codes: 0 success, 1 usage error, 2 solver
failure (any non-optimal row or solve).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from .bounds import BoundsError, chain_rules, load_overrides
from .experiments import (SPLIT_FORMULATIONS, comparison_csv, grid_csv, project_grid,
                          run_compare)
from .model import ModelError, load_model, model_to_dict, save_model, validate
from .mps import MpsError, write_mps
from .partition import PartitionError, load_partitions
from .problems import (ProblemError, gen_example1, gen_kmeans, gen_pball, gen_relu_min,
                       instance_from_model, load_network, load_points_csv, random_clusters,
                       random_pball, random_relu_net, ClusterInstance)
from .reformulate import FORMULATIONS, FormulationError, build, formulation_stats
from .solver import SolverOptions, branch_and_bound, solve_relaxation

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--model", type=Path, help="model JSON")
    p.add_argument("--partition", type=Path, help="partition JSON (overrides --P)")
    p.add_argument("--bounds", type=Path, help="bound-override JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    d = SolverOptions()
    p.add_argument("--time-limit-s", "--time_limit_s", dest="time_limit_s", type=float, default=d.time_limit_s)
    p.add_argument("--node-limit", "--node_limit", dest="node_limit", type=int, default=d.node_limit)
    p.add_argument("--gap-tol", "--gap_tol", dest="gap_tol", type=float, default=d.gap_tol)
    p.add_argument("--int-tol", "--int_tol", dest="int_tol", type=float, default=d.int_tol)
    p.add_argument("--oa-tol", "--oa_tol", dest="oa_tol", type=float, default=d.oa_tol)
    p.add_argument("--oa-max-iters", "--oa_max_iters", dest="oa_max_iters", type=int,
                   default=d.oa_max_iters)
    return p


def _formulation_args(p: argparse.ArgumentParser, many: bool = False) -> None:
    if many:
        p.add_argument("--formulations", type=lambda s: s.split(","), default=["bigm", "psplit"],
                       help=f"comma-separated subset of {', '.join(FORMULATIONS)}")
        p.add_argument("--P", type=_int_list, default=[1, 2], help="comma-separated split counts")
    else:
        p.add_argument("--formulation", choices=FORMULATIONS, default="psplit")
        p.add_argument("--P", type=int, default=2, help="number of splits")


def make_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="psplit", description="P-split formulations of disjunctive programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate an instance as model JSON")
    g.add_argument("family", choices=["ex1", "kmeans", "pball", "relu"])
    g.add_argument("--points", type=int, default=6)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--clusters", type=int, default=2)
    g.add_argument("--balls", type=int, default=3)
    g.add_argument("--layers", type=_int_list, default=[2, 4, 1],
                   help="layer widths including input and output, e.g. 2,4,1")
    g.add_argument("--data", type=Path, help="data CSV for kmeans (one point per line)")
    g.add_argument("--network", type=Path, help="network JSON for relu")
    g.add_argument("--objective", type=_float_list, help="ex1 objective coefficients")

    f = sub.add_parser("formulate", parents=[common], help="build a formulation and report its size")
    _formulation_args(f)

    r = sub.add_parser("relax", parents=[common], help="solve the continuous relaxation")
    _formulation_args(r)

    s = sub.add_parser("solve", parents=[common], help="branch-and-bound solve")
    _formulation_args(s)

    c = sub.add_parser("compare", parents=[common], help="compare formulations, CSV report")
    _formulation_args(c, many=True)
    c.add_argument("--no-mip", action="store_true", help="relaxations only")

    gr = sub.add_parser("grid", parents=[common], help="relaxation feasibility grid, CSV")
    _formulation_args(gr)
    gr.add_argument("--dims", type=_int_list, default=[0, 1], help="two variable indices")
    gr.add_argument("--window", type=_float_list, default=[-1.0, 4.0, -1.0, 4.0],
                    help="lo_i,hi_i,lo_j,hi_j")
    gr.add_argument("--resolution", type=_int_list, default=[41], help="n or n_i,n_j")

    e = sub.add_parser("export", parents=[common], help="write a formulation as MPS")
    _formulation_args(e)
    return parser


def _options(ns) -> SolverOptions:
    return SolverOptions(ns.time_limit_s, ns.node_limit, ns.gap_tol, ns.int_tol, ns.oa_tol,
                         ns.oa_max_iters)


def _emit(ns, text: str) -> None:
    if ns.out is None:
        sys.stdout.write(text)
    else:
        ns.out.write_text(text)


def _load(ns):
    if ns.model is None:
        raise UsageError("--model is required")
    inst = instance_from_model(load_model(ns.model))
    return inst


def _partitions(ns, inst, P: int):
    if ns.partition is not None:
        return load_partitions(ns.partition, len(inst.model.disjunctions))
    if P < 1:
        raise UsageError("P must be at least 1")
    return inst.partitions(min(P, inst.max_split))


def _rule(ns, inst, parts):
    if ns.bounds is None:
        return inst.bound_rule
    return chain_rules(load_overrides(ns.bounds, inst.model, parts), inst.bound_rule)


def _build(ns, inst):
    parts = _partitions(ns, inst, ns.P) if ns.formulation in SPLIT_FORMULATIONS else None
    rule = _rule(ns, inst, parts or _partitions(ns, inst, 1))
    return build(inst.model, ns.formulation, parts, rule)


def _cmd_gen(ns) -> int:
    fam = ns.family
    if fam == "ex1":
        inst = gen_example1(ns.objective)
    elif fam == "kmeans":
        if ns.data is not None:
            inst = gen_kmeans(ClusterInstance(load_points_csv(ns.data), ns.clusters))
        else:
            inst = gen_kmeans(random_clusters(ns.seed, ns.points, ns.dim, ns.clusters))
    elif fam == "pball":
        inst = gen_pball(random_pball(ns.seed, ns.balls, ns.points, ns.dim))
    else:
        net = load_network(ns.network) if ns.network else random_relu_net(ns.seed, ns.layers)
        inst = gen_relu_min(net)
    if ns.out is None:
        sys.stdout.write(json.dumps(model_to_dict(inst.model), indent=1) + "\n")
    else:
        save_model(inst.model, ns.out)
    return EXIT_OK


def _cmd_formulate(ns) -> int:
    inst = _load(ns)
    f = _build(ns, inst)
    report = {"formulation": ns.formulation, **asdict(formulation_stats(f)),
              "findings": [str(x) for x in validate(inst.model).findings]}
    _emit(ns, json.dumps(report, indent=1) + "\n")
    return EXIT_OK


def _num(v: float):
    return v if math.isfinite(v) else str(v)


def _cmd_relax(ns) -> int:
    inst = _load(ns)
    res = solve_relaxation(_build(ns, inst), _options(ns))
    out = {"status": res.status, "objective": _num(res.objective), "iterations": res.iterations,
           "oa_rounds": res.oa_rounds, "x": None if res.x is None else res.x.tolist()}
    _emit(ns, json.dumps(out) + "\n")
    return EXIT_OK if res.status == "optimal" else EXIT_SOLVER


def _cmd_solve(ns) -> int:
    inst = _load(ns)
    rep = branch_and_bound(_build(ns, inst), _options(ns))
    out = {"status": rep.status, "objective": _num(rep.objective), "bound": _num(rep.bound),
           "nodes": rep.nodes, "lp_iterations": rep.lp_iterations, "oa_cuts": rep.oa_cuts,
           "wall_time": rep.wall_time, "x": None if rep.x is None else rep.x.tolist(),
           "notes": rep.notes}
    _emit(ns, json.dumps(out) + "\n")
    return EXIT_OK if rep.status == "optimal" else EXIT_SOLVER


def _cmd_compare(ns) -> int:
    inst = _load(ns)
    bad = [f for f in ns.formulations if f not in FORMULATIONS]
    if bad:
        raise UsageError(f"unknown formulations: {', '.join(bad)}")
    if ns.partition is not None:
        # one explicit partition set replaces the --P list; overrides index its groups
        parts = _partitions(ns, inst, 1)
        by_P = {len(parts[0].groups): parts}
        rule = _rule(ns, inst, parts)
    else:
        by_P = {P: _partitions(ns, inst, P) for P in ns.P}
        if ns.bounds is not None:
            raise UsageError("--bounds with compare needs an explicit --partition")
        rule = inst.bound_rule
    rows = run_compare(inst.model, ns.formulations, by_P, _options(ns), rule,
                       solve_mip=not ns.no_mip)
    _emit(ns, comparison_csv(rows))
    return EXIT_OK if all(r.status == "optimal" for r in rows) else EXIT_SOLVER


def _cmd_grid(ns) -> int:
    inst = _load(ns)
    if len(ns.dims) != 2 or len(ns.window) != 4 or len(ns.resolution) not in (1, 2):
        raise UsageError("--dims needs 2 values, --window 4 and --resolution 1 or 2")
    f = _build(ns, inst)
    w = ns.window
    res = ns.resolution if len(ns.resolution) == 2 else ns.resolution * 2
    cells = project_grid(f, tuple(ns.dims), ((w[0], w[1]), (w[2], w[3])), tuple(res), _options(ns))
    names = (f.variables[ns.dims[0]].name, f.variables[ns.dims[1]].name)
    _emit(ns, grid_csv(cells, names))
    return EXIT_OK


def _cmd_export(ns) -> int:
    if ns.out is None:
        raise UsageError("export needs --out")
    inst = _load(ns)
    write_mps(_build(ns, inst), ns.out, inst.model.name or None)
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen, "formulate": _cmd_formulate, "relax": _cmd_relax, "solve": _cmd_solve,
    "compare": _cmd_compare, "grid": _cmd_grid, "export": _cmd_export,
}


def main(argv=None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    try:
        return COMMANDS[ns.command](ns)
    except (UsageError, ModelError, PartitionError, BoundsError, FormulationError, ProblemError,
            MpsError, ValueError, OSError, KeyError) as exc:
        print(f"psplit {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
