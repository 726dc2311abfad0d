"""Bounds on group sums, big-M coefficients and interval propagation.

Over a box every group sum of separable terms attains its extrema at the
per-term extrema, so the bounds are exact sums of term ranges. Problem
families with better knowledge (for instance "one of the two balls must
contain x") plug in a :data:`BoundRule` that overrides them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .model import BoxDomain, DisjunctiveModel, SeparableConstraint, UnivariateTerm
from .partition import Partition


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise BoundsError(f"interval [{self.lo}, {self.hi}] is empty")

    def __contains__(self, v: float) -> bool:
        return self.lo <= v <= self.hi


@dataclass(frozen=True)
class AlphaBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise BoundsError("alpha bounds must be finite")
        if self.lower > self.upper:
            raise BoundsError(f"alpha bounds [{self.lower}, {self.upper}] are empty")


# (disjunction, disjunct, constraint, group variables) -> bounds or None
BoundRule = Callable[[int, int, int, tuple[int, ...]], "AlphaBounds | None"]


def term_range(t: UnivariateTerm, dom: BoxDomain) -> Interval:
    """Exact range of one term over ``[dom.lower, dom.upper]``."""
    lo, hi = dom.lower, dom.upper
    cands = [t.value(lo), t.value(hi)]
    if t.kind == "quadratic" and t.a != 0.0:
        stat = t.c - t.q / (2.0 * t.a)
        cands.append(t.value(min(max(stat, lo), hi)))
    return Interval(float(min(cands)), float(max(cands)))


def group_range(c: SeparableConstraint, group: Iterable[int], box: Sequence[BoxDomain]) -> AlphaBounds:
    tm = c.term_map
    lo = hi = 0.0
    for i in group:
        r = term_range(tm[i], box[i])
        lo += r.lo
        hi += r.hi
    return AlphaBounds(lo, hi)


def split_groups(c: SeparableConstraint, p: Partition) -> tuple[tuple[int, ...], ...]:
    """Groups of ``p`` restricted to the support of ``c``."""
    try:
        return p.restrict(c.support).groups
    except ValueError as exc:
        raise BoundsError(str(exc)) from exc


def alpha_bounds(c: SeparableConstraint, p: Partition, box: Sequence[BoxDomain],
                 overrides: Mapping[tuple[int, ...], AlphaBounds] | None = None) -> list[AlphaBounds]:
    """Per-group bounds of ``sum_{i in group} h_i(x_i)`` over the box.

    ``overrides`` maps a group (tuple of variable ids) to externally derived
    bounds that replace the box values.
    """
    out = []
    for g in split_groups(c, p):
        if overrides is not None and g in overrides:
            out.append(overrides[g])
        else:
            out.append(group_range(c, g, box))
    return out


def bigm_from_alpha(ub_total: float, rhs: float) -> float:
    """Smallest valid big-M for ``g(x) <= rhs`` when ``g <= ub_total`` on the box."""
    if not np.isfinite(ub_total):
        raise BoundsError("upper bound must be finite")
    return float(ub_total - rhs)


def constraint_bounds(model: DisjunctiveModel, j: int, l: int, k: int,
                      groups: Sequence[tuple[int, ...]],
                      rule: BoundRule | None = None) -> list[AlphaBounds]:
    """Bounds for constraint ``k`` of disjunct ``(j, l)`` split along ``groups``."""
    c = model.disjunctions[j].disjuncts[l].constraints[k]
    out = []
    for g in groups:
        b = rule(j, l, k, tuple(g)) if rule is not None else None
        out.append(b if b is not None else group_range(c, g, model.variables))
    return out


def check_independent_bounds(c: SeparableConstraint, box: Sequence[BoxDomain],
                             overrides: Mapping[tuple[int, ...], AlphaBounds] | None = None,
                             tol: float = 1e-12) -> bool:
    """Whether per-term extrema add up for every pair of variables.

    On a box this holds for every separable constraint; it stops holding as
    soon as an override is tighter than the box-derived range of its group,
    since the override encodes coupling between the variables.
    """
    support = set(c.support)
    for g, b in (overrides or {}).items():
        if not set(g) <= support:
            continue
        box_b = group_range(c, g, box)
        if b.upper < box_b.upper - tol or b.lower > box_b.lower + tol:
            return False
    return True


def propagate_intervals(weights, biases, inputs: Sequence[Interval], relu: bool = True) -> list[Interval]:
    """Interval image of ``W x + b`` (optionally followed by ReLU)."""
    W = np.atleast_2d(np.asarray(weights, dtype=float))
    b = np.asarray(biases, dtype=float).reshape(-1)
    if W.shape[1] != len(inputs) or W.shape[0] != len(b):
        raise BoundsError(f"weights {W.shape}, bias {b.shape}, {len(inputs)} inputs")
    lo = np.array([iv.lo for iv in inputs])
    hi = np.array([iv.hi for iv in inputs])
    Wp, Wn = np.maximum(W, 0.0), np.minimum(W, 0.0)
    out_lo = Wp @ lo + Wn @ hi + b
    out_hi = Wp @ hi + Wn @ lo + b
    if relu:
        out_lo, out_hi = np.maximum(out_lo, 0.0), np.maximum(out_hi, 0.0)
    return [Interval(float(a), float(z)) for a, z in zip(out_lo, out_hi)]


def rule_from_table(table: Mapping[tuple[int, int, int, tuple[int, ...]], AlphaBounds]) -> BoundRule:
    def rule(j, l, k, g):
        return table.get((j, l, k, tuple(g)))
    return rule


def chain_rules(*rules: BoundRule | None) -> BoundRule | None:
    """First non-None answer wins."""
    rules = [r for r in rules if r is not None]
    if not rules:
        return None

    def rule(j, l, k, g):
        for r in rules:
            b = r(j, l, k, g)
            if b is not None:
                return b
        return None
    return rule


def load_overrides(path_or_data, model: DisjunctiveModel, partitions: Sequence[Partition]) -> BoundRule:
    """Read bound-override JSON.

    Format: a list of ``{"disjunction", "disjunct", "group", "lower", "upper"}``
    records with an optional ``"constraint"`` index (default 0). ``group``
    indexes the partition restricted to that constraint's support.
    """
    data = path_or_data
    if isinstance(data, (str, Path)):
        data = json.loads(Path(data).read_text())
    table = {}
    for rec in data:
        j, l = int(rec["disjunction"]), int(rec["disjunct"])
        k, s = int(rec.get("constraint", 0)), int(rec["group"])
        c = model.disjunctions[j].disjuncts[l].constraints[k]
        groups = split_groups(c, partitions[j])
        if not 0 <= s < len(groups):
            raise BoundsError(f"group {s} out of range for ({j}, {l}, {k})")
        table[(j, l, k, groups[s])] = AlphaBounds(float(rec["lower"]), float(rec["upper"]))
    return rule_from_table(table)
