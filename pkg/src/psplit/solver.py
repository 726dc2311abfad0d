"""LP relaxations, outer approximation and branch-and-bound.

Convex rows ``sum_i Q_ki x_i^2 + L_k x <= r_k`` never enter the LP directly.
Every squared variable gets one epigraph column ``tau_i >= x_i^2`` shared by
all rows, which turns each row into the linear row
``sum_i Q_ki tau_i + L_k x <= r_k``. The loop solves the LP, and for every
row violated by more than ``oa_tol`` at the LP point ``x*`` adds the tangent
cuts ``tau_i >= 2 x*_i x_i - x*_i^2`` of its squared variables. Their
``Q``-weighted sum is the gradient cut of the row at ``x*``, so each round is
at least as strong as a plain Kelley step, while the one-dimensional tangents
converge far faster than row cuts in many dimensions.

Branch-and-bound uses best-bound node selection, branches on the most
fractional selector and passes each node's cuts down to its children.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import simplex
from .reformulate import FlatMip
from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, LpResult

__all__ = [
    "LpResult", "SolveReport", "SolverOptions", "compile_mip", "interior_point", "solve_lp",
    "solve_relaxation", "relax_compiled", "branch_and_bound",
]


@dataclass(frozen=True)
class SolverOptions:
    time_limit_s: float = 600.0
    node_limit: int = 100_000
    gap_tol: float = 1e-6
    int_tol: float = 1e-6
    oa_tol: float = 1e-6
    oa_max_iters: int = 200
    lp_max_iter: int | None = None


@dataclass
class SolveReport:
    status: str
    objective: float
    x: np.ndarray | None
    bound: float
    nodes: int
    lp_iterations: int
    oa_cuts: int
    wall_time: float
    notes: list[str] = field(default_factory=list)


@dataclass
class CompiledMip:
    """Dense arrays of a FlatMip plus the lifted form of its convex rows.

    LP columns are the ``n`` model columns followed by one ``tau`` column per
    entry of ``quad`` (variables that appear squared in some convex row).
    """

    c: np.ndarray
    const: float
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    binaries: np.ndarray
    Q: np.ndarray           # convex rows: g(x) = Q @ x**2 + L @ x - r
    L: np.ndarray
    r: np.ndarray
    quad: np.ndarray        # model index of each tau column
    spread: float = 1.0     # bound on |g| over the box

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def width(self) -> int:
        return self.c.size + self.quad.size

    def convex_values(self, x):
        x = x[:self.n]
        return self.Q @ (x * x) + self.L @ x - self.r

    def cut(self, k, x):
        """Gradient cut ``a x <= b`` of row ``k`` at ``x`` (model space)."""
        x = x[:self.n]
        grad = 2.0 * self.Q[k] * x + self.L[k]
        g = self.Q[k] @ (x * x) + self.L[k] @ x - self.r[k]
        return grad, float(grad @ x - g)

    def tangents(self, cols, x):
        """Rows ``2 y x_i - tau_i <= y^2`` at ``y = x_i`` for tau columns ``cols``."""
        cols = list(cols)
        A = np.zeros((len(cols), self.width))
        b = np.zeros(len(cols))
        for row, t in enumerate(cols):
            i = self.quad[t]
            y = x[i]
            A[row, i] = 2.0 * y
            A[row, self.n + t] = -1.0
            b[row] = y * y
        return A, b

    def lifted_rows(self):
        """Convex rows as ``[L | Q_quad] (x, tau) <= r``."""
        return np.hstack([self.L, self.Q[:, self.quad]]), self.r

    def full_bounds(self, lb, ub):
        """Append tau bounds ``[min x^2, max x^2]`` over the model box."""
        lo, hi = np.asarray(lb)[self.quad], np.asarray(ub)[self.quad]
        t_hi = np.maximum(lo * lo, hi * hi)
        t_lo = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(lo * lo, hi * hi))
        return np.concatenate([lb, t_lo]), np.concatenate([ub, t_hi])

    def seed_cuts(self):
        """Tangents at both box ends and the midpoint of every squared variable."""
        rows, rhs = [], []
        for pt in (self.lb, 0.5 * (self.lb + self.ub), self.ub):
            A, b = self.tangents(range(self.quad.size), pt)
            rows.append(A)
            rhs.append(b)
        return np.vstack(rows), np.concatenate(rhs)


def compile_mip(f: FlatMip) -> CompiledMip:
    n = len(f.variables)
    c = np.zeros(n)
    for i, v in f.objective.items():
        c[i] = v
    ub_rows, eq_rows = [], []
    for row in f.linear_rows:
        a = np.zeros(n)
        for i, v in row.coeffs.items():
            a[i] += v
        if row.sense == "<=":
            ub_rows.append((a, row.rhs))
        elif row.sense == ">=":
            ub_rows.append((-a, -row.rhs))
        else:
            eq_rows.append((a, row.rhs))
    m = len(f.convex_rows)
    Q, L, r = np.zeros((m, n)), np.zeros((m, n)), np.zeros(m)
    for k, row in enumerate(f.convex_rows):
        quad, lin, rhs = row.canonical()
        for i, v in quad.items():
            if v < 0:
                raise ValueError(f"row {row.name} is not convex in x{i}")
            Q[k, i] = v
        for i, v in lin.items():
            L[k, i] = v
        r[k] = rhs

    def stack(rows):
        if not rows:
            return np.zeros((0, n)), np.zeros(0)
        return np.array([a for a, _ in rows]), np.array([b for _, b in rows])

    A_ub, b_ub = stack(ub_rows)
    A_eq, b_eq = stack(eq_rows)
    lb = np.array([v.lower for v in f.variables])
    ub = np.array([v.upper for v in f.variables])
    # |g_k| <= sum |Q| max(lb^2, ub^2) + sum |L| max(|lb|, |ub|) + |r|
    big = np.maximum(np.abs(lb), np.abs(ub))
    spread = float(np.max(np.abs(Q) @ big ** 2 + np.abs(L) @ big + np.abs(r), initial=0.0))
    quad = np.flatnonzero(Q.any(axis=0)) if m else np.zeros(0, dtype=int)
    return CompiledMip(
        c, f.objective_constant, A_ub, b_ub, A_eq, b_eq, lb, ub,
        np.array(f.binary_indices(), dtype=int), Q, L, r, quad, max(1.0, 2.0 * spread),
    )


def _lp(cm: CompiledMip, lb, ub, cut_A, cut_b, opts: SolverOptions) -> LpResult:
    """LP over (x, tau): linear rows, lifted convex rows and tangent cuts."""
    pad = cm.quad.size
    G, r = cm.lifted_rows()
    A_ub = np.vstack([np.pad(cm.A_ub, ((0, 0), (0, pad))), G, cut_A])
    b_ub = np.concatenate([cm.b_ub, r, cut_b])
    A_eq = np.pad(cm.A_eq, ((0, 0), (0, pad)))
    cost = np.concatenate([cm.c, np.zeros(pad)])
    res = simplex.solve(cost, A_ub, b_ub, A_eq, cm.b_eq, lb, ub, opts.lp_max_iter)
    if res.status == OPTIMAL:
        res.objective += cm.const
    return res


def _face_lp(cm: CompiledMip, lb, ub, cut_A, cut_b, level: float | None,
             opts: SolverOptions) -> LpResult:
    """``min t`` over ``{c x <= level}`` with every convex row relaxed to ``row <= t``.

    ``level=None`` drops the objective row.
    """
    pad = cm.quad.size
    w = cm.width
    G, r = cm.lifted_rows()
    m0 = cm.A_ub.shape[0]
    mc = G.shape[0]
    extra = 0 if level is None else 1
    A = np.zeros((m0 + mc + len(cut_b) + extra, w + 1))
    A[:m0, :cm.n] = cm.A_ub
    A[m0:m0 + mc, :w] = G
    A[m0:m0 + mc, w] = -1.0
    A[m0 + mc:m0 + mc + len(cut_b), :w] = cut_A
    b = [cm.b_ub, r, cut_b]
    if level is not None:
        A[-1, :cm.n] = cm.c
        b.append([level - cm.const])
    A_eq = np.pad(cm.A_eq, ((0, 0), (0, pad + 1)))
    cost = np.zeros(w + 1)
    cost[w] = 1.0
    return simplex.solve(cost, A, np.concatenate(b), A_eq, cm.b_eq, np.append(lb, -cm.spread),
                         np.append(ub, cm.spread), opts.lp_max_iter)


def interior_point(cm: CompiledMip, opts: SolverOptions, rounds: int = 60):
    """A point of the relaxation where every convex row is strictly negative.

    Approximately minimises the largest row value by outer approximation and
    returns the best strictly interior iterate, or None if none was found.
    """
    if not len(cm.r):
        return None
    lb, ub = cm.full_bounds(cm.lb, cm.ub)
    A, b = cm.seed_cuts()
    best, best_g = None, 0.0
    for _ in range(rounds):
        res = _face_lp(cm, lb, ub, A, b, None, opts)
        if res.status != OPTIMAL:
            break
        x = res.x[:cm.n]
        g = cm.convex_values(x)
        if g.max() < best_g:
            best, best_g = x.copy(), float(g.max())
        lower = res.x[-1]
        if lower >= 0.0 or (best is not None and best_g <= 0.5 * lower):
            break
        T, t = cm.tangents(range(cm.quad.size), x)
        A, b = np.vstack([A, T]), np.concatenate([b, t])
    return best


def _boundary(cm: CompiledMip, inner, x):
    """First point of the segment ``inner -> x`` where some convex row reaches zero."""
    d = x - inner
    qa = cm.Q @ (d * d)
    qb = 2.0 * cm.Q @ (inner * d) + cm.L @ d
    qc = cm.convex_values(inner)
    lam = 1.0
    for a, bb, cc in zip(qa, qb, qc):
        if a + bb + cc <= 0.0:
            continue
        if a > 1e-14:
            root = (-bb + math.sqrt(bb * bb - 4.0 * a * cc)) / (2.0 * a)
        else:
            root = -cc / bb
        lam = min(lam, root)
    return inner + lam * d


def solve_lp(f: FlatMip, oa_cuts=None, options: SolverOptions | None = None) -> LpResult:
    """Linear part of ``f`` (binaries relaxed) plus the given cut rows.

    ``oa_cuts`` is a pair ``(A, b)`` of extra ``A x <= b`` rows over the
    model columns. Convex rows are ignored.
    """
    opts = options or SolverOptions()
    cm = compile_mip(f)
    n = cm.n
    A, b = oa_cuts if oa_cuts is not None else (np.zeros((0, n)), np.zeros(0))
    A = np.asarray(A, dtype=float).reshape(-1, n)
    A_ub = np.vstack([cm.A_ub, A])
    b_ub = np.concatenate([cm.b_ub, np.asarray(b, dtype=float).reshape(-1)])
    res = simplex.solve(cm.c, A_ub, b_ub, cm.A_eq, cm.b_eq, cm.lb, cm.ub, opts.lp_max_iter)
    if res.status == OPTIMAL:
        res.objective += cm.const
    return res


@dataclass
class _OaOutcome:
    result: LpResult
    cut_A: np.ndarray
    cut_b: np.ndarray
    lp_iterations: int
    new_cuts: int


def _oa_solve(cm: CompiledMip, lb, ub, cut_A, cut_b, opts: SolverOptions,
              cutoff: float = math.inf, inner=None) -> _OaOutcome:
    """Outer-approximation loop over the lifted LP.

    ``lb``/``ub`` and the cut rows cover all LP columns; so does the
    returned point. Stops early once the LP bound reaches ``cutoff``.

    With a strictly interior point ``inner`` the tangents are taken where the
    segment from ``inner`` to the LP point leaves the convex set instead of
    at the LP point itself, which gives supporting cuts.

    When the bound stops moving the optimal face is degenerate and the
    simplex keeps returning far-off vertices of it. The loop then searches
    the face ``c x <= z + eps`` for the point with the smallest linearised
    row violation: either that point satisfies the rows (done) or the face
    holds no such point and the bound has to rise.
    """
    iters = 0
    added = 0
    rounds = 0
    z_prev = -math.inf
    last_x = None

    def add_cuts(x, rows):
        """Add tangents for ``rows``; False if they were already added at ``x``.

        Returning the point the last cuts were taken at means those cuts
        could not separate it at the LP's precision; another round would
        only repeat them.
        """
        nonlocal cut_A, cut_b, added, rounds, last_x
        if last_x is not None and np.array_equal(x, last_x):
            return False
        last_x = x.copy()
        n = cm.n
        used = cm.Q[rows][:, cm.quad].any(axis=0)
        cols = [t for t in np.flatnonzero(used) if x[cm.quad[t]] ** 2 > x[n + t] + 1e-12]
        if not cols:
            cols = list(np.flatnonzero(used))
        A, b = cm.tangents(cols, x)
        if inner is not None:
            xb = _boundary(cm, inner, x[:n])
            g = cm.convex_values(xb)
            near = np.flatnonzero(g >= g.max() - 1e-9)
            cb = list(np.flatnonzero(cm.Q[near][:, cm.quad].any(axis=0)))
            A2, b2 = cm.tangents(cb, xb)
            A, b = np.vstack([A, A2]), np.concatenate([b, b2])
        cut_A = np.vstack([cut_A, A])
        cut_b = np.concatenate([cut_b, b])
        added += len(b)
        rounds += 1
        return True

    def finish(res):
        res.iterations = iters
        res.oa_rounds, res.cuts = rounds, added
        return _OaOutcome(res, cut_A, cut_b, iters, added)

    while True:
        res = _lp(cm, lb, ub, cut_A, cut_b, opts)
        iters += res.iterations
        if res.status != OPTIMAL or res.objective >= cutoff or not len(cm.r):
            return finish(res)
        bad = np.flatnonzero(cm.convex_values(res.x) > opts.oa_tol)
        if bad.size == 0:
            return finish(res)
        if rounds >= opts.oa_max_iters:
            return finish(replace(res, status=ITERATION_LIMIT))
        z = res.objective
        eps = 1e-9 * max(1.0, abs(z))
        if not add_cuts(res.x, bad):
            # the residual violation is below what the LP can resolve
            return finish(res)
        if z > z_prev + eps:
            z_prev = z
            continue
        while True:
            face = _face_lp(cm, lb, ub, cut_A, cut_b, z + eps, opts)
            iters += face.iterations
            if face.status != OPTIMAL or face.x[-1] > opts.oa_tol:
                break
            x = face.x[:-1]
            bad = np.flatnonzero(cm.convex_values(x) > opts.oa_tol)
            if bad.size == 0:
                return finish(LpResult(OPTIMAL, float(cm.c @ x[:cm.n] + cm.const), x, iters))
            if rounds >= opts.oa_max_iters:
                return finish(replace(res, status=ITERATION_LIMIT))
            if not add_cuts(x, bad):
                return finish(LpResult(OPTIMAL, float(cm.c @ x[:cm.n] + cm.const), x, iters))


def _model_point(res: LpResult, n: int) -> LpResult:
    if res.x is not None:
        res.x = res.x[:n]
    return res


def solve_relaxation(f: FlatMip, options: SolverOptions | None = None) -> LpResult:
    """Continuous relaxation with convex rows enforced by outer approximation."""
    opts = options or SolverOptions()
    cm = compile_mip(f)
    return relax_compiled(cm, cm.lb, cm.ub, opts, interior_point(cm, opts))


def relax_compiled(cm: CompiledMip, lb, ub, options: SolverOptions | None = None,
                   inner=None) -> LpResult:
    """Relaxation of ``cm`` over the model box ``[lb, ub]``.

    Lets callers that solve many relaxations of one MIP with different
    bounds compile it (and find ``inner``) once.
    """
    opts = options or SolverOptions()
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        return LpResult(INFEASIBLE, math.nan, None, 0)
    full_lb, full_ub = cm.full_bounds(lb, ub)
    A, b = cm.seed_cuts()
    out = _oa_solve(cm, full_lb, full_ub, A, b, opts, inner=inner)
    return _model_point(out.result, cm.n)


def branch_and_bound(f: FlatMip, options: SolverOptions | None = None) -> SolveReport:
    """Best-bound branch-and-bound over the binary selectors of ``f``."""
    opts = options or SolverOptions()
    t0 = time.perf_counter()
    cm = compile_mip(f)
    n = cm.n
    bins = cm.binaries
    incumbent, best_x = math.inf, None
    nodes = lp_iters = cuts = 0
    notes: list[str] = []
    unresolved = math.inf
    seq = 0
    lb0, ub0 = cm.full_bounds(cm.lb, cm.ub)
    A0, b0 = cm.seed_cuts()
    inner = interior_point(cm, opts)
    # (bound, seq, lb, ub, cut_A, cut_b)
    heap = [(-math.inf, seq, lb0, ub0, A0, b0)]
    status = "optimal"

    def gap(v):
        return opts.gap_tol * max(1.0, abs(v)) if math.isfinite(v) else 0.0

    while heap:
        bound, _, lb, ub, cA, cb = heap[0]
        if bound >= incumbent - gap(incumbent):
            heapq.heappop(heap)
            continue
        if nodes >= opts.node_limit:
            status = "node_limit"
            break
        if time.perf_counter() - t0 > opts.time_limit_s:
            status = "time_limit"
            break
        heapq.heappop(heap)
        cutoff = incumbent - gap(incumbent)
        out = _oa_solve(cm, lb, ub, cA, cb, opts, cutoff, inner)
        nodes += 1
        lp_iters += out.lp_iterations
        cuts += out.new_cuts
        res = out.result
        if res.status == INFEASIBLE:
            continue
        if res.x is None or not np.isfinite(res.objective):
            notes.append(f"node {nodes}: {res.status}")
            status = "error"
            continue
        if res.objective >= cutoff:
            continue
        xb = res.x[bins] if bins.size else np.zeros(0)
        frac = np.abs(xb - np.round(xb))
        if frac.size == 0 or frac.max() <= opts.int_tol:
            if res.status == ITERATION_LIMIT:
                unresolved = min(unresolved, res.objective)
                notes.append(f"node {nodes}: outer approximation did not converge")
                continue
            incumbent, best_x = res.objective, res.x[:n].copy()
            continue
        # most fractional; argmax returns the lowest index on ties
        k = int(bins[np.argmax(np.minimum(xb - np.floor(xb), np.ceil(xb) - xb))])
        # children inherit the seed tangents and the cuts tight at this node
        slack = out.cut_b - out.cut_A @ res.x
        keep = slack <= 1e-6 * np.maximum(1.0, np.abs(out.cut_b))
        keep[:b0.size] = True
        kA, kb = out.cut_A[keep], out.cut_b[keep]
        for val in (1.0, 0.0):
            clb, cub = lb.copy(), ub.copy()
            clb[k] = cub[k] = val
            seq += 1
            heapq.heappush(heap, (res.objective, seq, clb, cub, kA, kb))

    open_bound = min((h[0] for h in heap), default=math.inf)
    bound = min(incumbent, open_bound, unresolved)
    if status == "optimal":
        if not math.isfinite(incumbent):
            status = "infeasible" if not math.isfinite(unresolved) else "oa_limit"
        elif unresolved < incumbent - gap(incumbent):
            status = "oa_limit"
    return SolveReport(status, incumbent, best_x, bound, max(nodes, 1), lp_iters, cuts,
                       time.perf_counter() - t0, notes)
