"""Disjunctive models over box domains with convex separable constraints.

A model holds a box for every variable, a linear objective, global linear
rows and a list of disjunctions. Every disjunct is a block of constraints
``sum_i h_i(x_i) <= b`` where each ``h_i`` is affine or a convex quadratic.
Models are immutable; reformulations never modify them.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


class ModelError(ValueError):
    """Structural problem that makes a model unusable."""


AFFINE = "affine"
QUADRATIC = "quadratic"
SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class VarRef:
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ModelError(f"negative variable index {self.index}")


@dataclass(frozen=True)
class BoxDomain:
    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ModelError(f"box [{lo}, {hi}] is not finite")
        if lo > hi:
            raise ModelError(f"empty box: lower {lo} > upper {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class UnivariateTerm:
    """One summand of a separable constraint.

    ``affine``: ``w * x``. ``quadratic``: ``a * (x - c)**2 + q * x``.
    Convexity (``a >= 0``) is not enforced here so that :func:`validate`
    can report it.
    """

    kind: str
    w: float = 0.0
    a: float = 0.0
    q: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in (AFFINE, QUADRATIC):
            raise ModelError(f"unknown term kind {self.kind!r}")
        for name in ("w", "a", "q", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ModelError(f"term parameter {name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def affine(cls, w: float) -> "UnivariateTerm":
        return cls(AFFINE, w=w)

    @classmethod
    def quadratic(cls, a: float, c: float = 0.0, q: float = 0.0) -> "UnivariateTerm":
        return cls(QUADRATIC, a=a, q=q, c=c)

    @property
    def is_affine(self) -> bool:
        return self.kind == AFFINE or self.a == 0.0

    @property
    def is_convex(self) -> bool:
        return self.kind == AFFINE or self.a >= 0.0

    @property
    def is_zero(self) -> bool:
        if self.kind == AFFINE:
            return self.w == 0.0
        return self.a == 0.0 and self.q == 0.0

    def expanded(self) -> tuple[float, float, float]:
        """Return ``(quad, lin, const)`` with term = quad*x^2 + lin*x + const."""
        if self.kind == AFFINE:
            return 0.0, self.w, 0.0
        return self.a, self.q - 2.0 * self.a * self.c, self.a * self.c * self.c

    def value(self, x):
        if self.kind == AFFINE:
            return self.w * x
        return self.a * (x - self.c) ** 2 + self.q * x

    def derivative(self, x):
        if self.kind == AFFINE:
            return self.w + 0.0 * x
        return 2.0 * self.a * (x - self.c) + self.q

    def to_dict(self, var: int) -> dict:
        if self.kind == AFFINE:
            return {"var": var, "kind": AFFINE, "params": {"w": self.w}}
        return {"var": var, "kind": QUADRATIC, "params": {"a": self.a, "q": self.q, "c": self.c}}


def _freeze_terms(terms) -> tuple[tuple[int, UnivariateTerm], ...]:
    items = terms.items() if isinstance(terms, Mapping) else terms
    out = {}
    for var, term in items:
        var = int(var)
        if var < 0:
            raise ModelError(f"negative variable index {var}")
        if var in out:
            raise ModelError(f"variable {var} appears twice in one constraint")
        out[var] = term
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class SeparableConstraint:
    """``sum_i h_i(x_i) <= rhs``."""

    terms: tuple[tuple[int, UnivariateTerm], ...]
    rhs: float

    def __init__(self, terms, rhs: float):
        object.__setattr__(self, "terms", _freeze_terms(terms))
        object.__setattr__(self, "rhs", float(rhs))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.terms)

    @property
    def term_map(self) -> dict[int, UnivariateTerm]:
        return dict(self.terms)

    @property
    def is_affine(self) -> bool:
        return all(t.is_affine for _, t in self.terms)

    def group_value(self, x, group: Iterable[int]) -> float:
        tm = self.term_map
        return float(sum(tm[i].value(x[i]) for i in group if i in tm))


@dataclass(frozen=True)
class Disjunct:
    constraints: tuple[SeparableConstraint, ...]

    def __init__(self, constraints: Iterable[SeparableConstraint]):
        object.__setattr__(self, "constraints", tuple(constraints))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted({v for c in self.constraints for v in c.support}))


@dataclass(frozen=True)
class Disjunction:
    disjuncts: tuple[Disjunct, ...]

    def __init__(self, disjuncts: Iterable[Disjunct]):
        object.__setattr__(self, "disjuncts", tuple(disjuncts))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted({v for d in self.disjuncts for v in d.support}))


@dataclass(frozen=True)
class LinearRow:
    coeffs: tuple[tuple[int, float], ...]
    rhs: float
    sense: str = "<="

    def __init__(self, coeffs, rhs: float, sense: str = "<="):
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        object.__setattr__(self, "coeffs", tuple((int(i), float(v)) for i, v in items))
        object.__setattr__(self, "rhs", float(rhs))
        object.__setattr__(self, "sense", sense)

    def activity(self, x) -> float:
        return float(sum(v * x[i] for i, v in self.coeffs))

    def satisfied(self, x, tol: float = 1e-9) -> bool:
        act = self.activity(x)
        if self.sense == "<=":
            return act <= self.rhs + tol
        if self.sense == ">=":
            return act >= self.rhs - tol
        return abs(act - self.rhs) <= tol


@dataclass(frozen=True)
class SelectorRow:
    """Linear row over disjunct indicators, keyed ``(disjunction, disjunct)``.

    Reformulations map every key to the matching binary selector. Used for
    coupling such as "at most one point per ball".
    """

    coeffs: tuple[tuple[tuple[int, int], float], ...]
    rhs: float
    sense: str = "<="

    def __init__(self, coeffs, rhs: float, sense: str = "<="):
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        object.__setattr__(
            self, "coeffs", tuple(((int(k[0]), int(k[1])), float(v)) for k, v in items)
        )
        object.__setattr__(self, "rhs", float(rhs))
        object.__setattr__(self, "sense", sense)


@dataclass(frozen=True)
class DisjunctiveModel:
    variables: tuple[BoxDomain, ...]
    objective: tuple[float, ...]
    disjunctions: tuple[Disjunction, ...] = ()
    global_linear: tuple[LinearRow, ...] = ()
    objective_constant: float = 0.0
    selector_rows: tuple[SelectorRow, ...] = ()
    name: str = "model"
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for attr in ("variables", "objective", "disjunctions", "global_linear", "selector_rows"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "objective", tuple(float(v) for v in self.objective))
        object.__setattr__(self, "objective_constant", float(self.objective_constant))
        n = len(self.variables)
        if len(self.objective) != n:
            raise ModelError(f"objective has {len(self.objective)} coefficients for {n} variables")
        for r, row in enumerate(self.global_linear):
            for i, _ in row.coeffs:
                if not 0 <= i < n:
                    raise ModelError(f"global row {r} references variable {i} (n={n})")
        for j, disj in enumerate(self.disjunctions):
            for l, dis in enumerate(disj.disjuncts):
                for k, con in enumerate(dis.constraints):
                    for i in con.support:
                        if i >= n:
                            raise ModelError(
                                f"disjunction {j} disjunct {l} constraint {k} "
                                f"references variable {i} (n={n})"
                            )
        for r, row in enumerate(self.selector_rows):
            for (j, l), _ in row.coeffs:
                if not (0 <= j < len(self.disjunctions)
                        and 0 <= l < len(self.disjunctions[j].disjuncts)):
                    raise ModelError(f"selector row {r} references missing disjunct ({j}, {l})")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b.lower for b in self.variables])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b.upper for b in self.variables])

    def objective_value(self, x) -> float:
        return float(np.dot(self.objective, x) + self.objective_constant)

    def with_objective(self, coeffs: Sequence[float], constant: float = 0.0) -> "DisjunctiveModel":
        return DisjunctiveModel(
            self.variables, tuple(coeffs), self.disjunctions, self.global_linear,
            constant, self.selector_rows, self.name, dict(self.meta),
        )


def evaluate_constraint(c: SeparableConstraint, x, n: int | None = None) -> float:
    """Return ``g(x) - b``; non-positive iff the constraint holds."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ModelError("point must be one-dimensional")
    if n is not None and len(x) != n:
        raise ModelError(f"point has dimension {len(x)}, model has {n}")
    if c.terms and c.support[-1] >= len(x):
        raise ModelError(f"point has dimension {len(x)}, constraint uses x{c.support[-1]}")
    return float(sum(t.value(x[i]) for i, t in c.terms) - c.rhs)


def disjunct_holds(d: Disjunct, x, tol: float = 1e-9) -> bool:
    return all(evaluate_constraint(c, x) <= tol for c in d.constraints)


def satisfied_disjuncts(model: DisjunctiveModel, x, tol: float = 1e-9) -> list[list[int]]:
    """Indices of the disjuncts that hold at ``x``, per disjunction."""
    return [
        [l for l, d in enumerate(disj.disjuncts) if disjunct_holds(d, x, tol)]
        for disj in model.disjunctions
    ]


def in_box(model: DisjunctiveModel, x, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= model.lower - tol) and np.all(x <= model.upper + tol))


def is_feasible(model: DisjunctiveModel, x, selection: Sequence[int] | None = None,
                tol: float = 1e-9) -> bool:
    """Membership oracle for the original disjunctive feasible set.

    With ``selection`` the chosen disjunct of every disjunction must hold and
    selector rows are checked against that choice; without it any satisfied
    disjunct will do (selector rows are then checked over all consistent
    choices by brute force, so keep such models small).
    """
    x = np.asarray(x, dtype=float)
    if not in_box(model, x, tol):
        return False
    if not all(row.satisfied(x, tol) for row in model.global_linear):
        return False
    if selection is not None:
        if any(not disjunct_holds(model.disjunctions[j].disjuncts[l], x, tol)
               for j, l in enumerate(selection)):
            return False
        return selection_ok(model, selection, tol)
    options = satisfied_disjuncts(model, x, tol)
    if any(not opt for opt in options):
        return False
    if not model.selector_rows:
        return True

    return any(selection_ok(model, sel, tol) for sel in itertools.product(*options))


def selection_ok(model: DisjunctiveModel, selection: Sequence[int], tol: float = 1e-9) -> bool:
    for row in model.selector_rows:
        act = sum(v for (j, l), v in row.coeffs if selection[j] == l)
        if row.sense == "<=" and act > row.rhs + tol:
            return False
        if row.sense == ">=" and act < row.rhs - tol:
            return False
        if row.sense == "==" and abs(act - row.rhs) > tol:
            return False
    return True


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str
    where: tuple = ()


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    constraint_ranges: dict[tuple[int, int, int], tuple[float, float]] = field(default_factory=dict)
    disjunct_nonempty: dict[tuple[int, int], bool] | None = None
    constraint_ratio: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.findings

    def kinds(self) -> set[str]:
        return {f.kind for f in self.findings}


def validate(model: DisjunctiveModel, check_nonempty: bool = False) -> ValidationReport:
    """Check convexity, boundedness and disjunct structure.

    Structural errors were already raised when the model was built; what
    remains is reported as findings. Nonemptiness of every disjunct on the
    box is only checked when asked, by solving one small relaxation per
    disjunct.
    """
    from .bounds import term_range

    rep = ValidationReport()
    ratios = []
    for j, disj in enumerate(model.disjunctions):
        if len(disj.disjuncts) < 2:
            rep.findings.append(Finding(
                "short disjunction", f"disjunction {j} has {len(disj.disjuncts)} disjunct(s)", (j,)))
        n_j = max(len(disj.support), 1)
        for l, dis in enumerate(disj.disjuncts):
            if not dis.constraints:
                rep.findings.append(Finding("empty disjunct", f"disjunct ({j}, {l}) has no constraints", (j, l)))
            ratios.append(len(dis.constraints) / n_j)
            for k, con in enumerate(dis.constraints):
                lo = hi = 0.0
                for i, t in con.terms:
                    if not t.is_convex:
                        rep.findings.append(Finding(
                            "non-convex term", f"term on x{i} has curvature {t.a} < 0", (j, l, k, i)))
                    if t.is_zero:
                        rep.findings.append(Finding(
                            "zero term", f"term on x{i} is identically zero", (j, l, k, i)))
                    r = term_range(t, model.variables[i])
                    lo += r.lo
                    hi += r.hi
                rep.constraint_ranges[(j, l, k)] = (lo, hi)
    rep.constraint_ratio = max(ratios, default=0.0)
    if check_nonempty:
        rep.disjunct_nonempty = {}
        for j, disj in enumerate(model.disjunctions):
            for l, dis in enumerate(disj.disjuncts):
                ok = _disjunct_nonempty(model, dis)
                rep.disjunct_nonempty[(j, l)] = ok
                if not ok:
                    rep.findings.append(Finding(
                        "empty on box", f"disjunct ({j}, {l}) has no point in the box", (j, l)))
    return rep


def _disjunct_nonempty(model: DisjunctiveModel, dis: Disjunct) -> bool:
    from .reformulate import FlatMip, Var, ConvexRow, add_convex_or_linear
    from .solver import solve_relaxation

    f = FlatMip(n_model_vars=model.n, formulation="feasibility")
    for i, b in enumerate(model.variables):
        f.variables.append(Var(f"x{i}", b.lower, b.upper))
    for k, con in enumerate(dis.constraints):
        add_convex_or_linear(f, ConvexRow(dict(con.terms), {}, con.rhs, f"c{k}"))
    return solve_relaxation(f).status == "optimal"


# --------------------------------------------------------------------------
# JSON


def _real(v) -> float:
    return float(v)


def _term_from_dict(d: Mapping) -> tuple[int, UnivariateTerm]:
    p = d.get("params", {})
    kind = d["kind"]
    if kind == AFFINE:
        return int(d["var"]), UnivariateTerm.affine(_real(p["w"]))
    if kind == QUADRATIC:
        return int(d["var"]), UnivariateTerm.quadratic(
            _real(p["a"]), _real(p.get("c", 0.0)), _real(p.get("q", 0.0)))
    raise ModelError(f"unknown term kind {kind!r}")


def model_to_dict(model: DisjunctiveModel) -> dict:
    out = {
        "name": model.name,
        "variables": [{"lb": b.lower, "ub": b.upper} for b in model.variables],
        "objective": {"coeffs": list(model.objective), "constant": model.objective_constant},
        "global_linear": [
            {"coeffs": [[i, v] for i, v in row.coeffs], "rhs": row.rhs, "sense": row.sense}
            for row in model.global_linear
        ],
        "disjunctions": [
            [
                [
                    {"terms": [t.to_dict(i) for i, t in con.terms], "rhs": con.rhs}
                    for con in dis.constraints
                ]
                for dis in disj.disjuncts
            ]
            for disj in model.disjunctions
        ],
    }
    if model.selector_rows:
        out["selector_rows"] = [
            {"coeffs": [[j, l, v] for (j, l), v in row.coeffs], "rhs": row.rhs, "sense": row.sense}
            for row in model.selector_rows
        ]
    if model.meta:
        out["meta"] = dict(model.meta)
    return out


def model_from_dict(data: Mapping) -> DisjunctiveModel:
    try:
        variables = [BoxDomain(_real(v["lb"]), _real(v["ub"])) for v in data["variables"]]
        obj = data.get("objective", {})
        coeffs = obj.get("coeffs", [0.0] * len(variables))
        if coeffs and isinstance(coeffs[0], (list, tuple)):
            dense = [0.0] * len(variables)
            for i, v in coeffs:
                dense[int(i)] = _real(v)
            coeffs = dense
        rows = [
            LinearRow([(int(i), _real(v)) for i, v in r["coeffs"]], _real(r["rhs"]), r.get("sense", "<="))
            for r in data.get("global_linear", [])
        ]
        disjunctions = [
            Disjunction(
                Disjunct(
                    SeparableConstraint([_term_from_dict(t) for t in con["terms"]], _real(con["rhs"]))
                    for con in dis
                )
                for dis in disj
            )
            for disj in data.get("disjunctions", [])
        ]
        sel = [
            SelectorRow([((int(j), int(l)), _real(v)) for j, l, v in r["coeffs"]],
                        _real(r["rhs"]), r.get("sense", "<="))
            for r in data.get("selector_rows", [])
        ]
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed model JSON: {exc}") from exc
    return DisjunctiveModel(
        variables, [_real(v) for v in coeffs], disjunctions, rows,
        _real(obj.get("constant", 0.0)), sel, data.get("name", "model"), dict(data.get("meta", {})),
    )


def save_model(model: DisjunctiveModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def load_model(path) -> DisjunctiveModel:
    return model_from_dict(json.loads(Path(path).read_text()))
