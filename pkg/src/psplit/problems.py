"""Benchmark families: the two-ball example, clustering, P_ball and ReLU nets.

Each generator returns an :class:`Instance`: the disjunctive model plus the
family's bound recipe and partition recipe. Sizes are desk scale; all
randomness goes through ``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bounds import AlphaBounds, BoundRule, Interval, group_range, propagate_intervals
from .model import (
    BoxDomain, Disjunct, Disjunction, DisjunctiveModel, LinearRow, SelectorRow,
    SeparableConstraint, UnivariateTerm,
)
from .partition import Partition, even_index_partition


class ProblemError(ValueError):
    pass


PartitionRecipe = Callable[[DisjunctiveModel, int], list[Partition]]


def default_partitions(model: DisjunctiveModel, P: int) -> list[Partition]:
    """Even contiguous split of every disjunction's variables (capped at its size)."""
    return [even_index_partition(d.support, min(P, len(d.support))) for d in model.disjunctions]


@dataclass(frozen=True)
class Instance:
    name: str
    model: DisjunctiveModel
    bound_rule: BoundRule | None = None
    partition_recipe: PartitionRecipe | None = None
    data: dict = field(default_factory=dict, compare=False)

    def partitions(self, P: int) -> list[Partition]:
        recipe = self.partition_recipe or default_partitions
        return recipe(self.model, P)

    @property
    def max_split(self) -> int:
        """Largest P the partition recipe supports."""
        return self.data.get("max_split", max(len(d.support) for d in self.model.disjunctions))


def _ball_rule(centers: np.ndarray, radius: float, var_of: Callable[[int, int], int]) -> BoundRule:
    """Group bounds for ``||x - c_l||^2 <= r^2`` when x lies in one of the balls.

    Upper bound in the subspace ``g``: ``max_b (||c_b - c_l||_g + r)^2``.
    ``var_of(j, i)`` gives the dimension of model variable ``i`` in
    disjunction ``j`` (or -1 when it is not a point coordinate).
    """
    def rule(j, l, k, group):
        dims = [var_of(j, i) for i in group]
        if any(d < 0 for d in dims):
            return None
        diff = centers[:, dims] - centers[l, dims]
        far = np.sqrt((diff ** 2).sum(axis=1)).max()
        return AlphaBounds(0.0, float((far + radius) ** 2))
    return rule


# --------------------------------------------------------------------------
# illustrative example


def gen_example1(objective: Sequence[float] | None = None) -> Instance:
    """``[sum x_i^2 <= 1] v [sum (3 - x_i)^2 <= 1]`` on ``[-1, 4]^4``.

    Bounds for group ``I_s`` are ``0`` and ``(sqrt(9 |I_s|) + 1)^2``.
    """
    n = 4
    ball0 = SeparableConstraint({i: UnivariateTerm.quadratic(1.0) for i in range(n)}, 1.0)
    ball3 = SeparableConstraint({i: UnivariateTerm.quadratic(1.0, c=3.0) for i in range(n)}, 1.0)
    model = DisjunctiveModel(
        [BoxDomain(-1.0, 4.0)] * n,
        objective if objective is not None else [0.0] * n,
        [Disjunction([Disjunct([ball0]), Disjunct([ball3])])],
        name="ex1",
        meta={"generator": {"family": "ex1"}},
    )

    def rule(j, l, k, group):
        return AlphaBounds(0.0, (math.sqrt(len(group) * 9.0) + 1.0) ** 2)

    return Instance("ex1", model, rule)


# --------------------------------------------------------------------------
# K-means clustering


@dataclass(frozen=True)
class ClusterInstance:
    points: np.ndarray
    k: int

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(pts)):
            raise ProblemError("data points must be finite")
        if not pts.shape[0] >= self.k >= 2:
            raise ProblemError(f"need L >= k >= 2, got L={pts.shape[0]}, k={self.k}")
        object.__setattr__(self, "points", pts)


def random_clusters(seed: int, points: int, dim: int, clusters: int) -> ClusterInstance:
    """Gaussian blobs around ``clusters`` random centres."""
    rng = np.random.default_rng(seed)
    centres = rng.uniform(0.0, 10.0, size=(clusters, dim))
    labels = np.arange(points) % clusters
    pts = centres[labels] + rng.normal(scale=1.5, size=(points, dim))
    return ClusterInstance(np.round(pts, 3), clusters)


def load_points_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))


def gen_kmeans(inst: ClusterInstance, name: str = "kmeans") -> Instance:
    """``min sum r_i  s.t.  OR_j [ ||x^j - d^i||^2 <= r_i ]`` for every point ``i``.

    Variables: centre ``j`` coordinate ``d`` is ``j*n + d``; radius ``i`` is
    ``k*n + i``. Centres live in the bounding box of the data and radii in
    ``[0, max squared pairwise distance]``.
    """
    pts, k = inst.points, inst.k
    L, n = pts.shape
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diff = pts[:, None, :] - pts[None, :, :]
    sq = diff ** 2                       # (L, L, n)
    rmax = float(sq.sum(axis=2).max())
    variables = [BoxDomain(lo[d], hi[d]) for _ in range(k) for d in range(n)]
    variables += [BoxDomain(0.0, rmax)] * L
    r0 = k * n
    disjunctions = []
    for i in range(L):
        disjuncts = []
        for j in range(k):
            terms = {j * n + d: UnivariateTerm.quadratic(1.0, c=pts[i, d]) for d in range(n)}
            terms[r0 + i] = UnivariateTerm.affine(-1.0)
            disjuncts.append(Disjunct([SeparableConstraint(terms, 0.0)]))
        disjunctions.append(Disjunction(disjuncts))
    model = DisjunctiveModel(
        variables, [0.0] * r0 + [1.0] * L, disjunctions, name=name,
        meta={"generator": {"family": "kmeans", "points": pts.tolist(), "k": k}},
    )

    def rule(j, l, kk, group):
        dims = [v % n for v in group if v < r0]
        has_r = any(v >= r0 for v in group)
        upper = float(sq[:, :, dims].sum(axis=2).max()) if dims else 0.0
        lower = -rmax if has_r else 0.0
        if not dims:
            upper = 0.0
        return AlphaBounds(lower, upper)

    def recipe(m: DisjunctiveModel, P: int) -> list[Partition]:
        dim_groups = even_index_partition(range(n), P).groups
        parts = []
        for i in range(L):
            groups = [[j * n + d for j in range(k) for d in g] for g in dim_groups]
            groups[-1].append(r0 + i)
            parts.append(Partition(groups))
        return parts

    return Instance(name, model, rule, recipe, {"max_split": n, "points": pts})


# --------------------------------------------------------------------------
# P_ball


@dataclass(frozen=True)
class PBallInstance:
    centers: np.ndarray
    p: int

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if self.p < 1:
            raise ProblemError("need at least one point")
        if self.p > c.shape[0]:
            raise ProblemError(f"{self.p} points cannot go to {c.shape[0]} distinct balls")
        object.__setattr__(self, "centers", c)


def random_pball(seed: int, balls: int, points: int, dim: int) -> PBallInstance:
    rng = np.random.default_rng(seed)
    return PBallInstance(np.round(rng.uniform(-3.0, 3.0, size=(balls, dim)), 3), points)


def gen_pball(inst: PBallInstance, name: str = "pball") -> Instance:
    """Place ``p`` points in distinct unit balls, minimising total pairwise l1 distance.

    Variables: point ``j`` coordinate ``d`` is ``j*n + d``, followed by one
    difference variable per point pair and dimension. Each point gets one
    disjunction over the balls; selector rows allow at most one point per
    ball.
    """
    C, p = inst.centers, inst.p
    m, n = C.shape
    lo, hi = C.min(axis=0) - 1.0, C.max(axis=0) + 1.0
    variables = [BoxDomain(lo[d], hi[d]) for _ in range(p) for d in range(n)]
    pairs = list(itertools.combinations(range(p), 2))
    t0 = p * n
    rows = []
    for q, (a, b) in enumerate(pairs):
        for d in range(n):
            t = t0 + q * n + d
            variables.append(BoxDomain(0.0, hi[d] - lo[d]))
            rows.append(LinearRow({a * n + d: 1.0, b * n + d: -1.0, t: -1.0}, 0.0))
            rows.append(LinearRow({a * n + d: -1.0, b * n + d: 1.0, t: -1.0}, 0.0))
    disjunctions = []
    for j in range(p):
        disjunctions.append(Disjunction(
            Disjunct([SeparableConstraint(
                {j * n + d: UnivariateTerm.quadratic(1.0, c=C[b, d]) for d in range(n)}, 1.0)])
            for b in range(m)
        ))
    selector = [SelectorRow({(j, b): 1.0 for j in range(p)}, 1.0) for b in range(m)] if p > 1 else []
    objective = [0.0] * t0 + [1.0] * (len(variables) - t0)
    model = DisjunctiveModel(
        variables, objective, disjunctions, rows, selector_rows=selector, name=name,
        meta={"generator": {"family": "pball", "centers": C.tolist(), "p": p}},
    )
    rule = _ball_rule(C, 1.0, lambda j, i: i - j * n if j * n <= i < (j + 1) * n else -1)
    return Instance(name, model, rule, None, {"max_split": n})


# --------------------------------------------------------------------------
# ReLU networks


@dataclass(frozen=True)
class ReluNetwork:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    input_box: tuple[Interval, ...]
    output_relu: bool = True

    def __post_init__(self):
        W = tuple(np.atleast_2d(np.asarray(w, dtype=float)) for w in self.weights)
        b = tuple(np.asarray(v, dtype=float).reshape(-1) for v in self.biases)
        if len(W) != len(b) or not W:
            raise ProblemError("need one bias vector per weight matrix")
        width = len(self.input_box)
        for w, v in zip(W, b):
            if w.shape != (len(v), width):
                raise ProblemError(f"layer shape {w.shape} does not follow width {width}")
            width = len(v)
        if width != 1:
            raise ProblemError("final layer must have a single output")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "biases", b)
        object.__setattr__(self, "input_box", tuple(self.input_box))

    def forward(self, x) -> float:
        h = np.asarray(x, dtype=float)
        for t, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = w @ h + b
            if t < len(self.weights) - 1 or self.output_relu:
                h = np.maximum(h, 0.0)
        return float(h[0])

    @property
    def units(self) -> int:
        return sum(len(b) for b in self.biases)


def random_relu_net(seed: int, layers: Sequence[int], output_relu: bool = False) -> ReluNetwork:
    """``layers = [inputs, hidden..., 1]``; inputs on ``[-1, 1]``."""
    if len(layers) < 2 or layers[-1] != 1:
        raise ProblemError("layers must start with the input width and end with 1")
    rng = np.random.default_rng(seed)
    W, B = [], []
    for a, b in zip(layers[:-1], layers[1:]):
        W.append(np.round(rng.normal(size=(b, a)), 3))
        B.append(np.round(rng.normal(scale=0.5, size=b), 3))
    return ReluNetwork(tuple(W), tuple(B), tuple(Interval(-1.0, 1.0) for _ in range(layers[0])),
                       output_relu)


def load_network(path) -> ReluNetwork:
    data = json.loads(Path(path).read_text())
    return ReluNetwork(
        tuple(np.array(layer["weights"], dtype=float) for layer in data["layers"]),
        tuple(np.array(layer["bias"], dtype=float) for layer in data["layers"]),
        tuple(Interval(float(b["lb"]), float(b["ub"])) for b in data["input_box"]),
        bool(data.get("output_relu", True)),
    )


def network_to_dict(net: ReluNetwork) -> dict:
    return {
        "layers": [{"weights": w.tolist(), "bias": b.tolist()} for w, b in zip(net.weights, net.biases)],
        "input_box": [{"lb": iv.lo, "ub": iv.hi} for iv in net.input_box],
        "output_relu": net.output_relu,
    }


def gen_relu_min(net: ReluNetwork, name: str = "relu") -> Instance:
    """Minimise the network output over its input box.

    Every unit with a sign-changing pre-activation becomes the two-term
    disjunction ``[w x + b >= 0, y = w x + b] v [y = 0, w x + b <= 0]``
    (equalities as two inequalities). Units whose interval bounds fix the
    sign are encoded directly: ``y = w x + b`` rows or ``y`` fixed to 0.
    """
    variables = [BoxDomain(iv.lo, iv.hi) for iv in net.input_box]
    prev = list(range(len(variables)))
    intervals = list(net.input_box)
    rows: list[LinearRow] = []
    disjunctions = []
    objective_coeffs: dict[int, float] = {}
    objective_constant = 0.0
    n_layers = len(net.weights)
    for t, (W, b) in enumerate(zip(net.weights, net.biases)):
        relu = t < n_layers - 1 or net.output_relu
        pre = propagate_intervals(W, b, intervals, relu=False)
        if not relu:
            for i, v in zip(prev, W[0]):
                objective_coeffs[i] = objective_coeffs.get(i, 0.0) + float(v)
            objective_constant = float(b[0])
            break
        cur, post = [], []
        for u in range(len(b)):
            y = len(variables)
            lo, hi = pre[u].lo, pre[u].hi
            variables.append(BoxDomain(max(lo, 0.0), max(hi, 0.0)))
            cur.append(y)
            post.append(Interval(max(lo, 0.0), max(hi, 0.0)))
            wx = {i: float(v) for i, v in zip(prev, W[u]) if v != 0.0}
            if lo >= 0.0:
                eq = dict(wx)
                eq[y] = -1.0
                rows.append(LinearRow(eq, -float(b[u]), "=="))
            elif hi <= 0.0:
                pass  # box already pins y to 0
            else:
                neg_wx = {i: UnivariateTerm.affine(-v) for i, v in wx.items()}
                pos_wx = {i: UnivariateTerm.affine(v) for i, v in wx.items()}
                active = Disjunct([
                    SeparableConstraint(neg_wx, float(b[u])),
                    SeparableConstraint({**neg_wx, y: UnivariateTerm.affine(1.0)}, float(b[u])),
                    SeparableConstraint({**pos_wx, y: UnivariateTerm.affine(-1.0)}, -float(b[u])),
                ])
                inactive = Disjunct([
                    SeparableConstraint({y: UnivariateTerm.affine(1.0)}, 0.0),
                    SeparableConstraint({y: UnivariateTerm.affine(-1.0)}, 0.0),
                    SeparableConstraint(pos_wx, -float(b[u])),
                ])
                disjunctions.append(Disjunction([active, inactive]))
        prev, intervals = cur, post
    if net.output_relu:
        objective_coeffs = {prev[0]: 1.0}
    obj = [0.0] * len(variables)
    for i, v in objective_coeffs.items():
        obj[i] = v
    model = DisjunctiveModel(
        variables, obj, disjunctions, rows, objective_constant, name=name,
        meta={"generator": {"family": "relu", **network_to_dict(net)}},
    )
    return Instance(name, model, None, None, {"network": net})


# --------------------------------------------------------------------------
# random affine disjunctions (property and acceptance batteries)


def random_affine_disjunction(rng: np.random.Generator, n: int, n_disjuncts: int = 2,
                              name: str = "affine") -> DisjunctiveModel:
    """One disjunction of single-row affine disjuncts over a random box.

    Every right-hand side sits strictly inside the row's range over the box,
    so no disjunct is empty or redundant. The objective is random.
    """
    lb = np.round(rng.uniform(-2.0, 0.0, n), 3)
    ub = np.round(rng.uniform(1.0, 3.0, n), 3)
    disjuncts = []
    for _ in range(n_disjuncts):
        w = np.round(rng.normal(size=n), 3)
        w[w == 0.0] = 0.5
        lo = np.minimum(w * lb, w * ub).sum()
        hi = np.maximum(w * lb, w * ub).sum()
        b = lo + rng.uniform(0.15, 0.85) * (hi - lo)
        disjuncts.append(Disjunct([SeparableConstraint(
            {i: UnivariateTerm.affine(w[i]) for i in range(n)}, b)]))
    return DisjunctiveModel(
        [BoxDomain(a, z) for a, z in zip(lb, ub)], np.round(rng.normal(size=n), 3),
        [Disjunction(disjuncts)], name=name,
    )


def random_quadratic_disjunction(rng: np.random.Generator, n: int, name: str = "quad") -> DisjunctiveModel:
    """Two-term disjunction of separable convex quadratic rows over a random box."""
    lb = np.round(rng.uniform(-2.0, 0.0, n), 3)
    ub = np.round(rng.uniform(1.0, 3.0, n), 3)
    disjuncts = []
    for _ in range(2):
        terms = {}
        for i in range(n):
            if rng.random() < 0.7:
                terms[i] = UnivariateTerm.quadratic(
                    round(rng.uniform(0.2, 2.0), 3), round(rng.uniform(lb[i], ub[i]), 3),
                    round(rng.normal(scale=0.5), 3))
            else:
                terms[i] = UnivariateTerm.affine(round(rng.normal(), 3) or 0.5)
        con = SeparableConstraint(terms, 0.0)
        box = [BoxDomain(a, z) for a, z in zip(lb, ub)]
        r = group_range(con, con.support, box)
        b = r.lower + rng.uniform(0.1, 0.5) * (r.upper - r.lower)
        disjuncts.append(Disjunct([SeparableConstraint(terms, b)]))
    return DisjunctiveModel(
        [BoxDomain(a, z) for a, z in zip(lb, ub)], np.round(rng.normal(size=n), 3),
        [Disjunction(disjuncts)], name=name,
    )


def instance_from_model(model: DisjunctiveModel) -> Instance:
    """Rebuild the family recipes recorded in ``model.meta`` (if any)."""
    gen = dict(model.meta.get("generator", {}))
    family = gen.get("family")
    if family == "ex1":
        inst = gen_example1(model.objective)
    elif family == "kmeans":
        inst = gen_kmeans(ClusterInstance(np.array(gen["points"]), int(gen["k"])), model.name)
    elif family == "pball":
        inst = gen_pball(PBallInstance(np.array(gen["centers"]), int(gen["p"])), model.name)
    elif family == "relu":
        net = ReluNetwork(
            tuple(np.array(layer["weights"]) for layer in gen["layers"]),
            tuple(np.array(layer["bias"]) for layer in gen["layers"]),
            tuple(Interval(b["lb"], b["ub"]) for b in gen["input_box"]),
            bool(gen.get("output_relu", True)),
        )
        inst = gen_relu_min(net, model.name)
    else:
        return Instance(model.name, model)
    if inst.model.with_objective(model.objective, model.objective_constant) != model:
        # the file was edited after generation: keep its content, drop the recipes
        return Instance(model.name, model)
    return Instance(model.name, model, inst.bound_rule, inst.partition_recipe, inst.data)
