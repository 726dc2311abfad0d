"""Big-M, P-split (extended and two-term non-extended) and hull formulations.

Every builder turns a :class:`~psplit.model.DisjunctiveModel` into a
:class:`FlatMip`: bounded continuous and binary variables, linear rows and
convex separable rows. Names are deterministic:

* ``x{i}``                 original variables
* ``lam{j}_{l}``           selector of disjunct ``l`` in disjunction ``j``
* ``a{j}_{l}_{s}``         group-sum variable of group ``s``
* ``nu{j}_{l}_{s}_{d}``    copy of ``a{j}_{l}_{s}`` owned by disjunct ``d``
* ``v{j}_{d}_{i}``         hull copy of ``x{i}`` owned by disjunct ``d``

When a disjunct has several constraints, group-sum names get a ``_k{k}``
suffix for constraint ``k > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bounds import BoundRule, bigm_from_alpha, constraint_bounds, split_groups
from .model import DisjunctiveModel, UnivariateTerm
from .partition import Partition


class FormulationError(ValueError):
    pass


CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass
class Var:
    name: str
    lower: float
    upper: float
    kind: str = CONTINUOUS
    tag: str = "x"


@dataclass
class LinRow:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str


@dataclass
class ConvexRow:
    """``sum_i terms[i](x_i) + sum_j linear[j] * x_j <= rhs``."""

    terms: dict[int, UnivariateTerm]
    linear: dict[int, float]
    rhs: float
    name: str

    def canonical(self) -> tuple[dict[int, float], dict[int, float], float]:
        """``(quad, lin, rhs')`` with the row equal to ``sum quad x^2 + lin x <= rhs'``."""
        quad: dict[int, float] = {}
        lin: dict[int, float] = {}
        rhs = self.rhs
        for i, t in self.terms.items():
            a, b, c = t.expanded()
            if a != 0.0:
                quad[i] = a
            lin[i] = b
            rhs -= c
        for i, v in self.linear.items():
            lin[i] = lin.get(i, 0.0) + v
        return quad, lin, rhs

    @property
    def is_linear(self) -> bool:
        return all(t.is_affine for t in self.terms.values())

    def value(self, x) -> float:
        return float(sum(t.value(x[i]) for i, t in self.terms.items())
                     + sum(v * x[i] for i, v in self.linear.items()) - self.rhs)


@dataclass
class FlatMip:
    variables: list[Var] = field(default_factory=list)
    linear_rows: list[LinRow] = field(default_factory=list)
    convex_rows: list[ConvexRow] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    provenance: dict[str, dict] = field(default_factory=dict)
    formulation: str = ""
    n_model_vars: int = 0
    notes: list[str] = field(default_factory=list)

    def index(self, name: str) -> int:
        for k, v in enumerate(self.variables):
            if v.name == name:
                return k
        raise KeyError(name)

    def add_var(self, name, lower, upper, kind=CONTINUOUS, tag="x", **prov) -> int:
        self.variables.append(Var(name, float(lower), float(upper), kind, tag))
        if prov:
            self.provenance[name] = prov
        return len(self.variables) - 1

    def add_row(self, coeffs, sense, rhs, name, **prov) -> None:
        self.linear_rows.append(LinRow({k: float(v) for k, v in coeffs.items() if v != 0.0},
                                       sense, float(rhs), name))
        if prov:
            self.provenance[name] = prov

    def binary_indices(self) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.kind == BINARY]

    def tagged(self, tag: str) -> list[int]:
        return [k for k, v in enumerate(self.variables) if v.tag == tag]

    def rows_with_role(self, role: str) -> list[str]:
        return [name for name, p in self.provenance.items() if p.get("role") == role]


def add_convex_or_linear(f: FlatMip, row: ConvexRow, **prov) -> None:
    """Append ``row``; rows whose terms are all affine become linear rows."""
    if row.is_linear:
        quad, lin, rhs = row.canonical()
        f.add_row(lin, "<=", rhs, row.name, **prov)
    else:
        f.convex_rows.append(row)
        if prov:
            f.provenance[row.name] = prov


@dataclass(frozen=True)
class FormulationStats:
    continuous: int
    binary: int
    linear_rows: int
    convex_rows: int
    added_continuous: int
    alpha: int
    nu: int


def formulation_stats(f: FlatMip) -> FormulationStats:
    cont = sum(1 for v in f.variables if v.kind == CONTINUOUS)
    return FormulationStats(
        continuous=cont,
        binary=len(f.binary_indices()),
        linear_rows=len(f.linear_rows),
        convex_rows=len(f.convex_rows),
        added_continuous=cont - f.n_model_vars,
        alpha=len(f.tagged("alpha")),
        nu=len(f.tagged("nu")),
    )


# --------------------------------------------------------------------------
# shared scaffolding


def _start(model: DisjunctiveModel, formulation: str) -> FlatMip:
    for j, disj in enumerate(model.disjunctions):
        if len(disj.disjuncts) < 2:
            raise FormulationError(f"disjunction {j} has fewer than two disjuncts")
        for l, dis in enumerate(disj.disjuncts):
            if not dis.constraints:
                raise FormulationError(f"disjunct ({j}, {l}) has no constraints")
    f = FlatMip(formulation=formulation, n_model_vars=model.n)
    for i, b in enumerate(model.variables):
        f.add_var(f"x{i}", b.lower, b.upper)
    f.objective = {i: v for i, v in enumerate(model.objective) if v != 0.0}
    f.objective_constant = model.objective_constant
    for r, row in enumerate(model.global_linear):
        f.add_row(dict(row.coeffs), row.sense, row.rhs, f"g{r}", role="global")
    return f


def _selectors(f: FlatMip, model: DisjunctiveModel) -> dict[tuple[int, int], int]:
    lam = {}
    for j, disj in enumerate(model.disjunctions):
        for l in range(len(disj.disjuncts)):
            lam[j, l] = f.add_var(f"lam{j}_{l}", 0.0, 1.0, BINARY, "lambda",
                                  role="selector", disjunction=j, disjunct=l)
        f.add_row({lam[j, l]: 1.0 for l in range(len(disj.disjuncts))}, "==", 1.0,
                  f"cvx{j}", role="convexity", disjunction=j)
    for r, row in enumerate(model.selector_rows):
        f.add_row({lam[key]: v for key, v in row.coeffs}, row.sense, row.rhs,
                  f"sel{r}", role="selector_row")
    return lam


def _partitions(model: DisjunctiveModel, partitions) -> list[Partition]:
    if isinstance(partitions, Partition):
        return [partitions] * len(model.disjunctions)
    parts = list(partitions)
    if len(parts) != len(model.disjunctions):
        raise FormulationError(f"{len(parts)} partitions for {len(model.disjunctions)} disjunctions")
    return parts


def _suffix(n_constraints: int, k: int) -> str:
    return f"_k{k}" if n_constraints > 1 and k > 0 else ""


# --------------------------------------------------------------------------
# builders


def build_bigm(model: DisjunctiveModel, rule: BoundRule | None = None) -> FlatMip:
    """``g(x) <= b + M (1 - lambda)`` with ``M = max g - b``."""
    f = _start(model, "bigm")
    lam = _selectors(f, model)
    for j, disj in enumerate(model.disjunctions):
        for l, dis in enumerate(disj.disjuncts):
            for k, con in enumerate(dis.constraints):
                ub = constraint_bounds(model, j, l, k, [con.support], rule)[0].upper
                M = bigm_from_alpha(ub, con.rhs)
                if M < 0:
                    f.notes.append(f"negative big-M {M:g} in ({j}, {l}, {k})")
                name = f"bm{j}_{l}" + _suffix(len(dis.constraints), k)
                row = ConvexRow(dict(con.terms), {lam[j, l]: M}, con.rhs + M, name)
                add_convex_or_linear(f, row, role="bigm", disjunction=j, disjunct=l,
                                     constraint=k, M=M, formulation="bigm")
    return f


def _split_blocks(f, model, j, parts, rule, formulation):
    """Add group-sum variables and split rows for disjunction ``j``.

    Returns ``{(l, k): (groups, bounds, alpha indices)}``.
    """
    disj = model.disjunctions[j]
    blocks = {}
    for l, dis in enumerate(disj.disjuncts):
        for k, con in enumerate(dis.constraints):
            groups = split_groups(con, parts[j])
            bnds = constraint_bounds(model, j, l, k, groups, rule)
            sfx = _suffix(len(dis.constraints), k)
            alphas = []
            tm = con.term_map
            for s, (g, b) in enumerate(zip(groups, bnds)):
                a = None
                if formulation == "psplit":
                    a = f.add_var(f"a{j}_{l}_{s}{sfx}", b.lower, b.upper, CONTINUOUS, "alpha",
                                  role="alpha", disjunction=j, disjunct=l, constraint=k, group=s)
                    row = ConvexRow({i: tm[i] for i in g}, {a: -1.0}, 0.0, f"split{j}_{l}_{s}{sfx}")
                    add_convex_or_linear(f, row, role="split", disjunction=j, disjunct=l,
                                         constraint=k, group=s, formulation=formulation)
                alphas.append(a)
            blocks[l, k] = (groups, bnds, alphas)
    return blocks


def build_psplit_extended(model: DisjunctiveModel, partitions, rule: BoundRule | None = None) -> FlatMip:
    """Hull of the split disjunction in the group-sum variables.

    ``partitions`` is one :class:`Partition` for every disjunction or a
    sequence with one per disjunction; each is restricted to the support of
    every constraint it splits.
    """
    parts = _partitions(model, partitions)
    f = _start(model, "psplit")
    lam = _selectors(f, model)
    for j, disj in enumerate(model.disjunctions):
        D = len(disj.disjuncts)
        blocks = _split_blocks(f, model, j, parts, rule, "psplit")
        for (l, k), (groups, bnds, alphas) in blocks.items():
            sfx = _suffix(len(disj.disjuncts[l].constraints), k)
            own = []
            for s, (b, a) in enumerate(zip(bnds, alphas)):
                nus = []
                for d in range(D):
                    lo, hi = min(b.lower, 0.0), max(b.upper, 0.0)
                    nu = f.add_var(f"nu{j}_{l}_{s}_{d}{sfx}", lo, hi, CONTINUOUS, "nu",
                                   role="nu", disjunction=j, disjunct=l, constraint=k,
                                   group=s, owner=d)
                    nus.append(nu)
                    f.add_row({nu: -1.0, lam[j, d]: b.lower}, "<=", 0.0,
                              f"nulo{j}_{l}_{s}_{d}{sfx}", role="nu_lower", disjunction=j,
                              disjunct=l, constraint=k, group=s, owner=d)
                    f.add_row({nu: 1.0, lam[j, d]: -b.upper}, "<=", 0.0,
                              f"nuup{j}_{l}_{s}_{d}{sfx}", role="nu_upper", disjunction=j,
                              disjunct=l, constraint=k, group=s, owner=d)
                link = {a: 1.0}
                for nu in nus:
                    link[nu] = -1.0
                f.add_row(link, "==", 0.0, f"link{j}_{l}_{s}{sfx}", role="link",
                          disjunction=j, disjunct=l, constraint=k, group=s)
                own.append(nus[l])
            rhs = disj.disjuncts[l].constraints[k].rhs
            agg = {nu: 1.0 for nu in own}
            agg[lam[j, l]] = -rhs
            f.add_row(agg, "<=", 0.0, f"agg{j}_{l}{sfx}", role="aggregate",
                      disjunction=j, disjunct=l, constraint=k)
    return f


def build_psplit_nonextended(model: DisjunctiveModel, partitions, rule: BoundRule | None = None,
                             strict_subsets: bool = False) -> FlatMip:
    """Projected two-term P-split: one row per disjunct and subset of groups.

    For subset ``S`` of the groups of a disjunct's constraint the row is
    ``sum_{s in S} sum_{i in I_s} h(x_i) <= (b - sum_{s not in S} lo_s) lam_own
    + (sum_{s in S} hi_s) lam_other``. All nonempty subsets are generated
    unless ``strict_subsets`` drops the full set.
    """
    parts = _partitions(model, partitions)
    for j, disj in enumerate(model.disjunctions):
        if len(disj.disjuncts) != 2:
            raise FormulationError(
                f"disjunction {j} has {len(disj.disjuncts)} disjuncts; the non-extended "
                "form needs exactly two")
    f = _start(model, "psplit-nonext")
    lam = _selectors(f, model)
    for j, disj in enumerate(model.disjunctions):
        blocks = _split_blocks(f, model, j, parts, rule, "psplit-nonext")
        for (l, k), (groups, bnds, _) in blocks.items():
            con = disj.disjuncts[l].constraints[k]
            tm = con.term_map
            own, other = lam[j, l], lam[j, 1 - l]
            P = len(groups)
            sfx = _suffix(len(disj.disjuncts[l].constraints), k)
            for mask in range(1, 2 ** P):
                if strict_subsets and mask == 2 ** P - 1 and P > 1:
                    continue
                chosen = [s for s in range(P) if mask >> s & 1]
                rest = [s for s in range(P) if not mask >> s & 1]
                terms = {i: tm[i] for s in chosen for i in groups[s]}
                c_own = con.rhs - sum(bnds[s].lower for s in rest)
                c_other = sum(bnds[s].upper for s in chosen)
                row = ConvexRow(terms, {own: -c_own, other: -c_other}, 0.0,
                                f"ne{j}_{l}_{mask}{sfx}")
                add_convex_or_linear(f, row, role="nonext", disjunction=j, disjunct=l,
                                     constraint=k, subset=tuple(chosen),
                                     formulation="psplit-nonext")
    return f


def build_hull_extended(model: DisjunctiveModel) -> FlatMip:
    """Disaggregated (Balas) hull; affine disjuncts only."""
    for j, disj in enumerate(model.disjunctions):
        for l, dis in enumerate(disj.disjuncts):
            for k, con in enumerate(dis.constraints):
                if not con.is_affine:
                    raise FormulationError(
                        f"hull formulation is affine only; constraint ({j}, {l}, {k}) is nonlinear")
    f = _start(model, "hull")
    lam = _selectors(f, model)
    for j, disj in enumerate(model.disjunctions):
        support = disj.support
        copies = {}
        for d in range(len(disj.disjuncts)):
            for i in support:
                b = model.variables[i]
                v = f.add_var(f"v{j}_{d}_{i}", min(b.lower, 0.0), max(b.upper, 0.0),
                              CONTINUOUS, "nu", role="copy", disjunction=j, owner=d, var=i)
                copies[d, i] = v
                f.add_row({v: -1.0, lam[j, d]: b.lower}, "<=", 0.0, f"vlo{j}_{d}_{i}",
                          role="copy_lower", disjunction=j, owner=d, var=i)
                f.add_row({v: 1.0, lam[j, d]: -b.upper}, "<=", 0.0, f"vup{j}_{d}_{i}",
                          role="copy_upper", disjunction=j, owner=d, var=i)
        for i in support:
            row = {i: 1.0}
            for d in range(len(disj.disjuncts)):
                row[copies[d, i]] = -1.0
            f.add_row(row, "==", 0.0, f"xsum{j}_{i}", role="copy_link", disjunction=j, var=i)
        for d, dis in enumerate(disj.disjuncts):
            for k, con in enumerate(dis.constraints):
                row = {}
                for i, t in con.terms:
                    _, w, _ = t.expanded()
                    row[copies[d, i]] = w
                row[lam[j, d]] = -con.rhs
                f.add_row(row, "<=", 0.0, f"hull{j}_{d}" + _suffix(len(dis.constraints), k),
                          role="hull", disjunction=j, disjunct=d, constraint=k)
    return f


FORMULATIONS = ("bigm", "psplit", "psplit-nonext", "hull")


def build(model: DisjunctiveModel, formulation: str, partitions=None,
          rule: BoundRule | None = None, **kw) -> FlatMip:
    """Dispatch on a formulation name from :data:`FORMULATIONS`."""
    if formulation == "bigm":
        return build_bigm(model, rule)
    if formulation == "psplit":
        return build_psplit_extended(model, partitions, rule)
    if formulation == "psplit-nonext":
        return build_psplit_nonextended(model, partitions, rule, **kw)
    if formulation == "hull":
        return build_hull_extended(model)
    raise FormulationError(f"unknown formulation {formulation!r}")


def relaxed_copy(f: FlatMip) -> FlatMip:
    """Same rows with binaries turned continuous on [0, 1]."""
    g = FlatMip(
        [Var(v.name, v.lower, v.upper, CONTINUOUS, v.tag) for v in f.variables],
        list(f.linear_rows), list(f.convex_rows), dict(f.objective), f.objective_constant,
        dict(f.provenance), f.formulation, f.n_model_vars, list(f.notes),
    )
    return g


def fix_selectors(f: FlatMip, selection: Sequence[int]) -> FlatMip:
    """Copy of ``f`` with ``lam{j}_{selection[j]}`` fixed to one and the rest to zero."""
    g = relaxed_copy(f)
    for k, v in enumerate(g.variables):
        if v.tag == "lambda":
            p = f.provenance[v.name]
            val = 1.0 if selection[p["disjunction"]] == p["disjunct"] else 0.0
            g.variables[k] = Var(v.name, val, val, BINARY, v.tag)
    return g

