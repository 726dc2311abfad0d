"""Dense simplex codes for small bounded LPs.

Solves ``min c x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``lb <= x <= ub``
with all bounds finite. Variables are shifted to ``[0, ub - lb]`` and kept
nonbasic at either bound, so the box never turns into rows.

The default is a dual simplex on the short tableau (rows by nonbasic
columns), started from the all-slack basis with every structural at the
bound its cost prefers, which is dual feasible from the outset and needs no
phase 1. Equality rows get a slack boxed to ``[0, 0]``. The leaving row is
chosen by dual steepest edge, the entering column by a bound-flipping ratio
test with a Harris pass. Infeasibility is only reported on a fresh
refactorisation, and only when the violated row cannot be repaired even by
moving every helpful column to its far bound. If that check is
inconclusive, or the basis goes singular on a refactorisation, the solve is
retried with more frequent refactors and then handed to the fallback.

The fallback (``method="primal"``) is a two-phase primal simplex on the
full tableau with Dantzig pricing and Bland's rule after a run of
degenerate pivots. Both codes are deterministic functions of the input.

The pivoting loops are compiled with numba; the outer-approximation loop
calls them thousands of times on small tableaux, where interpreter overhead
would otherwise dominate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

PIVOT_TOL = 1e-6
COST_TOL = 1e-9
FEAS_TOL = 1e-7
HARRIS_TOL = 1e-9
DEGENERATE_RUN = 30
REFACTOR_EVERY = 100
SHORT_REFACTOR_EVERY = 200
RESYNC_EVERY = 100

_OPT, _UNB, _ITER = 0, 1, 2


@dataclass
class LpResult:
    status: str
    objective: float
    x: np.ndarray | None
    iterations: int
    oa_rounds: int = 0
    cuts: int = 0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


@numba.njit(cache=True)
def _nonbasic_values(upper, at_upper, basis):
    v = np.where(at_upper, upper, 0.0)
    for b in basis:
        v[b] = 0.0
    return v


@numba.njit(cache=True)
def _refactor(A, rhs, upper, at_upper, basis, T, beta):
    B = np.ascontiguousarray(A[:, basis])
    if B.shape[0] == 0:
        return
    # a singular basis (should not happen) keeps the updated tableau
    sign, _ = np.linalg.slogdet(B)
    if sign == 0.0:
        return
    T[:, :] = np.linalg.solve(B, A)
    beta[:] = np.linalg.solve(B, rhs - A @ _nonbasic_values(upper, at_upper, basis))


@numba.njit(cache=True)
def _pivot(T, basis, r, j):
    piv = T[r, j]
    m, ncol = T.shape
    for c in range(ncol):
        T[r, c] /= piv
    for i in range(m):
        if i == r:
            continue
        f = T[i, j]
        if f != 0.0:
            for c in range(ncol):
                T[i, c] -= f * T[r, c]
    basis[r] = j


@numba.njit(cache=True)
def _run(A, rhs, T, beta, basis, at_upper, upper, cost, active, max_iter, iters):
    """Primal simplex from the current basis. Returns ``(code, iterations)``."""
    m, ncol = T.shape
    bland = False
    degenerate = 0
    since_refactor = 0
    basic = np.zeros(ncol, dtype=np.bool_)
    d = np.empty(ncol)
    alpha = np.empty(m)
    ratios = np.empty(m)
    hit_upper = np.zeros(m, dtype=np.bool_)
    while True:
        if iters >= max_iter:
            return _ITER, iters
        basic[:] = False
        for b in basis:
            basic[b] = True
        # reduced costs
        for c in range(ncol):
            s = cost[c]
            for i in range(m):
                s -= cost[basis[i]] * T[i, c]
            d[c] = s
        j = -1
        best = 0.0
        up = False
        for c in range(ncol):
            if basic[c] or not active[c]:
                continue
            cu = (not at_upper[c]) and d[c] < -COST_TOL and upper[c] > 0.0
            cd = at_upper[c] and d[c] > COST_TOL
            if cu or cd:
                if bland:
                    j = c
                    up = cu
                    break
                if abs(d[c]) > best:
                    best = abs(d[c])
                    j = c
                    up = cu
        if j < 0:
            return _OPT, iters
        sigma = 1.0 if up else -1.0
        t_rows = np.inf
        for i in range(m):
            alpha[i] = sigma * T[i, j]
            ratios[i] = np.inf
            hit_upper[i] = False
            a = alpha[i]
            ub_b = upper[basis[i]]
            if a > PIVOT_TOL:
                ratios[i] = max(beta[i], 0.0) / a
                t_rows = min(t_rows, (max(beta[i], 0.0) + HARRIS_TOL) / a)
            elif a < -PIVOT_TOL and np.isfinite(ub_b):
                ratios[i] = max(ub_b - beta[i], 0.0) / -a
                t_rows = min(t_rows, (max(ub_b - beta[i], 0.0) + HARRIS_TOL) / -a)
                hit_upper[i] = True
        t_own = upper[j]
        if not np.isfinite(t_rows) and not np.isfinite(t_own):
            return _UNB, iters
        iters += 1
        if t_own <= t_rows:
            t = t_own
            for i in range(m):
                beta[i] -= t * alpha[i]
            at_upper[j] = not at_upper[j]
        else:
            # Harris: largest pivot among rows within the relaxed step
            r = -1
            for i in range(m):
                if ratios[i] <= t_rows:
                    if r < 0:
                        r = i
                    elif bland:
                        if basis[i] < basis[r]:
                            r = i
                    elif abs(alpha[i]) > abs(alpha[r]):
                        r = i
            t = ratios[r]
            leaving = basis[r]
            for i in range(m):
                beta[i] -= t * alpha[i]
            beta[r] = (upper[j] - t) if at_upper[j] else t
            at_upper[leaving] = hit_upper[r]
            at_upper[j] = False
            _pivot(T, basis, r, j)
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                _refactor(A, rhs, upper, at_upper, basis, T, beta)
                since_refactor = 0
        if t <= 1e-12:
            degenerate += 1
            if degenerate >= DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False


class _Tableau:
    def __init__(self, A, rhs, upper, basis):
        self.A = A                    # original (sign-adjusted) constraint matrix
        self.rhs = rhs
        self.upper = upper            # column upper bounds (lower is 0), may be inf
        self.basis = np.asarray(basis, dtype=np.int64)
        self.at_upper = np.zeros(A.shape[1], dtype=bool)
        self.T = A.copy()
        self.beta = rhs.copy()
        self.iterations = 0

    def refactor(self):
        _refactor(self.A, self.rhs, self.upper, self.at_upper, self.basis, self.T, self.beta)

    def values(self):
        v = _nonbasic_values(self.upper, self.at_upper, self.basis)
        v[self.basis] = self.beta
        return v

    def run(self, cost, max_iter, active):
        code, self.iterations = _run(self.A, self.rhs, self.T, self.beta, self.basis,
                                     self.at_upper, self.upper, cost, active, max_iter,
                                     self.iterations)
        return (OPTIMAL, UNBOUNDED, ITERATION_LIMIT)[code]

    def drop_row(self, r):
        keep = np.arange(len(self.basis)) != r
        self.A = np.ascontiguousarray(self.A[keep])
        self.rhs = self.rhs[keep]
        self.T = np.ascontiguousarray(self.T[keep])
        self.beta = self.beta[keep]
        self.basis = self.basis[keep]


def _solve_primal(c, A_ub, b_ub, A_eq, b_eq, lb, ub, max_iter) -> LpResult:
    n = c.size
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    m = m1 + m2

    # shift to y = x - lb in [0, u]
    u = ub - lb
    r_ub = b_ub - A_ub @ lb
    r_eq = b_eq - A_eq @ lb

    # columns: y (n) | slacks (m1) | artificials (added below)
    A = np.zeros((m, n + m1))
    A[:m1, :n] = A_ub
    A[m1:, :n] = A_eq
    A[:m1, n:] = np.eye(m1)
    rhs = np.concatenate([r_ub, r_eq])
    upper = np.concatenate([u, np.full(m1, np.inf)])

    basis = [-1] * m
    art_rows = []
    for i in range(m):
        if i < m1 and rhs[i] >= 0:
            basis[i] = n + i
        else:
            if rhs[i] < 0:
                A[i] *= -1.0
                rhs[i] *= -1.0
            art_rows.append(i)
    n_art = len(art_rows)
    if n_art:
        art = np.zeros((m, n_art))
        for k, i in enumerate(art_rows):
            art[i, k] = 1.0
            basis[i] = n + m1 + k
        A = np.hstack([A, art])
        upper = np.concatenate([upper, np.full(n_art, np.inf)])
    ncol = A.shape[1]
    tab = _Tableau(A, rhs, upper, basis)
    active = np.ones(ncol, dtype=bool)

    if n_art:
        cost1 = np.zeros(ncol)
        cost1[n + m1:] = 1.0
        st = tab.run(cost1, max_iter, active)
        if st == ITERATION_LIMIT:
            return LpResult(ITERATION_LIMIT, np.nan, None, tab.iterations)
        tab.refactor()
        infeas = float(np.sum(tab.values()[n + m1:]))
        if infeas > FEAS_TOL * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return LpResult(INFEASIBLE, np.nan, None, tab.iterations)
        _drive_out_artificials(tab, n + m1)
        active[n + m1:] = False
        tab.upper[n + m1:] = 0.0

    cost2 = np.zeros(ncol)
    cost2[:n] = c
    st = tab.run(cost2, max_iter, active)
    tab.refactor()
    y = tab.values()[:n]
    x = np.clip(lb + y, lb, ub)
    if st != OPTIMAL:
        return LpResult(st, np.nan, x if st == ITERATION_LIMIT else None, tab.iterations)
    return LpResult(OPTIMAL, float(c @ x), x, tab.iterations)


def _drive_out_artificials(tab: _Tableau, first_art: int) -> None:
    """Pivot basic artificials (at value ~0) out, dropping redundant rows."""
    r = 0
    while r < len(tab.basis):
        if tab.basis[r] < first_art:
            r += 1
            continue
        row = tab.T[r, :first_art].copy()
        row[tab.basis[tab.basis < first_art]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-7)
        if cand.size:
            j = int(cand[np.argmax(np.abs(row[cand]))])
            val = tab.upper[j] if tab.at_upper[j] else 0.0
            tab.at_upper[j] = False
            _pivot(tab.T, tab.basis, r, j)
            tab.beta[r] = val
            r += 1
        else:
            # redundant row: remove it from the working system
            tab.drop_row(r)


# --------------------------------------------------------------------------
# dual simplex on the short tableau
#
# Every row gets a slack (``[0, inf)`` for ``<=`` rows, ``[0, 0]`` for
# equalities). The all-slack basis with every structural column at the bound
# favoured by its cost is dual feasible because all boxes are finite, so no
# phase 1 is needed. The tableau only stores the ``n`` nonbasic columns,
# which matters when cut rows make ``m`` much larger than ``n``.


@numba.njit(cache=True)
def _short_pivot(T, basis, nonbasic, r, q):
    m, k = T.shape
    p = T[r, q]
    # pivot row with a zero in column q keeps the inner loop branch-free
    row = T[r, :] / p
    row[q] = 0.0
    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f != 0.0:
            Ti = T[i]
            for c in range(k):
                Ti[c] -= f * row[c]
            Ti[q] = -f / p
    row[q] = 1.0 / p
    T[r, :] = row
    leaving = basis[r]
    basis[r] = nonbasic[q]
    nonbasic[q] = leaving


@numba.njit(cache=True)
def _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
    """Recompute ``T`` and ``beta`` from the basis.

    Basic columns are structurals plus slacks, so ``B z = v`` reduces to a
    square system on the structural columns and the rows whose slack is
    nonbasic. Returns False if that system is singular.
    """
    m, n = A.shape
    K = np.empty(m, dtype=np.int64)
    R = np.empty(m, dtype=np.int64)
    nk = 0
    nr = 0
    for p in range(m):
        if basis[p] < n:
            K[nk] = basis[p]
            nk += 1
    for q in range(nonbasic.size):
        if nonbasic[q] >= n:
            R[nr] = nonbasic[q] - n
            nr += 1
    if nk != nr:
        return False
    K = K[:nk]
    R = R[:nr]
    Bs = np.empty((nk, nk))
    for a in range(nk):
        for b in range(nk):
            Bs[a, b] = A[R[a], K[b]]
    k = nonbasic.size
    V = np.zeros((m, k + 1))
    xn = np.zeros(k)
    for q in range(k):
        j = nonbasic[q]
        if j < n:
            V[:, q] = A[:, j]
        else:
            V[j - n, q] = 1.0
        xn[q] = upper[j] if at_upper[j] else 0.0
    for i in range(m):
        acc = rhs[i]
        for q in range(k):
            acc -= V[i, q] * xn[q]
        V[i, k] = acc
    if nk:
        VR = np.ascontiguousarray(V[R, :])
        sign, _ = np.linalg.slogdet(Bs)
        if sign == 0.0:
            return False
        ZK = np.linalg.solve(Bs, VR)
        if not np.all(np.isfinite(ZK)):
            return False
        res = np.abs(Bs @ ZK - VR).max()
        if res > 1e-7 * max(1.0, np.abs(VR).max()):
            return False
    else:
        ZK = np.zeros((0, k + 1))
    Z = V.copy()
    if nk:
        Z -= np.ascontiguousarray(A[:, K]) @ np.ascontiguousarray(ZK)
    for a in range(nk):
        Z[R[a], :] = 0.0
    slot = np.full(n, -1, dtype=np.int64)
    for a in range(nk):
        slot[K[a]] = a
    for p in range(m):
        j = basis[p]
        src = ZK[slot[j]] if j < n else Z[j - n]
        T[p, :] = src[:k]
        beta[p] = src[k]
    return True


@numba.njit(cache=True)
def _resync_beta(rhs, upper, at_upper, basis, nonbasic, T, beta, n):
    """Recompute basic values from the current tableau.

    The column of ``B^-1`` for row ``i`` is the tableau column of its slack
    when that slack is nonbasic, else the unit vector of the slack's basis
    position, so ``beta = B^-1 rhs - T x_N`` needs no factorisation.
    """
    m, k = T.shape
    for p in range(m):
        j = basis[p]
        beta[p] = rhs[j - n] if j >= n else 0.0
    for q in range(k):
        j = nonbasic[q]
        w = -(upper[j] if at_upper[j] else 0.0)
        if j >= n:
            w += rhs[j - n]
        if w != 0.0:
            for p in range(m):
                beta[p] += T[p, q] * w


@numba.njit(cache=True)
def _reduced_costs(cost, basis, nonbasic, T, d):
    m, k = T.shape
    for q in range(k):
        d[q] = cost[nonbasic[q]]
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            for q in range(k):
                d[q] -= cb * T[i, q]


@numba.njit(cache=True)
def _update_costs(T, d, r, q):
    """Reduced costs after pivoting on ``(r, q)``; call before the pivot."""
    k = d.size
    f = d[q] / T[r, q]
    for c in range(k):
        if c != q:
            d[c] -= f * T[r, c]
    d[q] = -f


@numba.njit(cache=True)
def _dual_run(A, rhs, T, beta, basis, nonbasic, at_upper, upper, cost, max_iter, iters, ptol,
              refactor_every):
    """Dual simplex until primal feasible. Returns ``(code, iterations)``
    with code 0 optimal, 1 infeasible, 2 iteration limit."""
    m, k = T.shape
    bland = False
    degenerate = 0
    since_refactor = 0
    d = np.empty(k)
    cand = np.empty(k, dtype=np.int64)
    rat = np.empty(k)
    _reduced_costs(cost, basis, nonbasic, T, d)
    while True:
        if iters >= max_iter:
            return 2, iters
        # leaving row: dual steepest edge (Bland: smallest variable index)
        r = -1
        worst = 0.0
        below = False
        n_struct = A.shape[1]
        for i in range(m):
            j = basis[i]
            v = 0.0
            lo = False
            if beta[i] < -ptol:
                v = -beta[i]
                lo = True
            elif beta[i] > upper[j] + ptol:
                v = beta[i] - upper[j]
            if v > 0.0:
                if bland:
                    if r < 0 or j < basis[r]:
                        r = i
                        below = lo
                    continue
                # steepest edge: squared norm of row i of the basis inverse
                w = 1.0 if j >= n_struct else 0.0
                for c in range(k):
                    if nonbasic[c] >= n_struct:
                        w += T[i, c] * T[i, c]
                score = v * v / max(w, 1e-12)
                if score > worst:
                    worst = score
                    r = i
                    below = lo
        if r < 0:
            return 0, iters
        target = 0.0 if below else upper[basis[r]]
        # bound-flipping ratio test: walk the breakpoints in ratio order and
        # flip boxed candidates to their other bound while the dual slope
        # stays positive; among the rest pick the entering column by a
        # Harris pass (largest pivot within the relaxed step)
        nc = 0
        for c in range(k):
            j = nonbasic[c]
            if upper[j] <= 0.0:
                continue
            a = T[r, c]
            if below:
                ok = (a < -PIVOT_TOL and not at_upper[j]) or (a > PIVOT_TOL and at_upper[j])
            else:
                ok = (a > PIVOT_TOL and not at_upper[j]) or (a < -PIVOT_TOL and at_upper[j])
            if ok:
                cand[nc] = c
                rat[nc] = abs(d[c]) / abs(a)
                nc += 1
        order = np.argsort(rat[:nc], kind="mergesort")
        slope = abs(beta[r] - target)
        start = 0
        if not bland:
            while start < nc:
                c = cand[order[start]]
                step = abs(T[r, c]) * upper[nonbasic[c]]
                if step >= slope:
                    break
                slope -= step
                start += 1
        q = -1
        best = np.inf
        if start < nc:
            bound = np.inf
            for s in range(start, nc):
                c = cand[order[s]]
                bound = min(bound, (abs(d[c]) + HARRIS_TOL) / abs(T[r, c]))
            for s in range(start, nc):
                c = cand[order[s]]
                if rat[order[s]] > bound:
                    continue
                if q < 0:
                    q = c
                elif bland:
                    if nonbasic[c] < nonbasic[q]:
                        q = c
                elif abs(T[r, c]) > abs(T[r, q]):
                    q = c
            best = abs(d[q]) / abs(T[r, q])
        if q < 0:
            if since_refactor == 0:
                # certificate: moving every helpful column to its far bound,
                # tiny entries included, still leaves row r violated
                reach = 0.0
                for c in range(k):
                    j = nonbasic[c]
                    a = T[r, c]
                    if upper[j] <= 0.0 or abs(a) <= 1e-12:
                        continue
                    if below:
                        helpful = (a < 0.0) != at_upper[j]
                    else:
                        helpful = (a > 0.0) != at_upper[j]
                    if helpful:
                        reach += abs(a) * upper[j]
                if reach < abs(beta[r] - target) - ptol:
                    return 1, iters
                return 4, iters
            # confirm on a fresh factorisation before declaring infeasibility
            if not _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
                return 4, iters
            _reduced_costs(cost, basis, nonbasic, T, d)
            since_refactor = 0
            continue
        for s in range(start):
            c = cand[order[s]]
            j = nonbasic[c]
            shift = -upper[j] if at_upper[j] else upper[j]
            at_upper[j] = not at_upper[j]
            for i in range(m):
                beta[i] -= T[i, c] * shift
        iters += 1
        jq = nonbasic[q]
        delta = (beta[r] - target) / T[r, q]
        old = upper[jq] if at_upper[jq] else 0.0
        for i in range(m):
            beta[i] -= delta * T[i, q]
        beta[r] = old + delta
        leaving = basis[r]
        at_upper[leaving] = not below and np.isfinite(upper[leaving]) and upper[leaving] > 0.0
        at_upper[jq] = False
        _update_costs(T, d, r, q)
        _short_pivot(T, basis, nonbasic, r, q)
        since_refactor += 1
        if since_refactor >= refactor_every:
            if not _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
                return 4, iters
            _reduced_costs(cost, basis, nonbasic, T, d)
            since_refactor = 0
        elif since_refactor % RESYNC_EVERY == 0:
            _resync_beta(rhs, upper, at_upper, basis, nonbasic, T, beta, A.shape[1])
            _reduced_costs(cost, basis, nonbasic, T, d)
        if best <= 1e-12:
            degenerate += 1
            if degenerate >= DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False


@numba.njit(cache=True)
def _primal_run(A, rhs, T, beta, basis, nonbasic, at_upper, upper, cost, max_iter, iters,
                refactor_every):
    """Primal simplex from a primal feasible basis (clean-up after the dual)."""
    m, k = T.shape
    bland = False
    degenerate = 0
    since_refactor = 0
    d = np.empty(k)
    alpha = np.empty(m)
    ratios = np.empty(m)
    hit_upper = np.zeros(m, dtype=np.bool_)
    _reduced_costs(cost, basis, nonbasic, T, d)
    while True:
        if iters >= max_iter:
            return 2, iters
        q = -1
        best = 0.0
        up = False
        for c in range(k):
            j = nonbasic[c]
            cu = (not at_upper[j]) and d[c] < -COST_TOL and upper[j] > 0.0
            cd = at_upper[j] and d[c] > COST_TOL
            if cu or cd:
                if bland:
                    if q < 0 or j < nonbasic[q]:
                        q = c
                        up = cu
                elif abs(d[c]) > best:
                    best = abs(d[c])
                    q = c
                    up = cu
        if q < 0:
            return 0, iters
        jq = nonbasic[q]
        sigma = 1.0 if up else -1.0
        t_rows = np.inf
        for i in range(m):
            alpha[i] = sigma * T[i, q]
            ratios[i] = np.inf
            hit_upper[i] = False
            a = alpha[i]
            ub_b = upper[basis[i]]
            if a > PIVOT_TOL:
                ratios[i] = max(beta[i], 0.0) / a
                t_rows = min(t_rows, (max(beta[i], 0.0) + HARRIS_TOL) / a)
            elif a < -PIVOT_TOL and np.isfinite(ub_b):
                ratios[i] = max(ub_b - beta[i], 0.0) / -a
                t_rows = min(t_rows, (max(ub_b - beta[i], 0.0) + HARRIS_TOL) / -a)
                hit_upper[i] = True
        t_own = upper[jq]
        if not np.isfinite(t_rows) and not np.isfinite(t_own):
            return 3, iters
        iters += 1
        if t_own <= t_rows:
            t = t_own
            for i in range(m):
                beta[i] -= t * alpha[i]
            at_upper[jq] = not at_upper[jq]
        else:
            # Harris: largest pivot among rows within the relaxed step
            r = -1
            for i in range(m):
                if ratios[i] <= t_rows:
                    if r < 0:
                        r = i
                    elif bland:
                        if basis[i] < basis[r]:
                            r = i
                    elif abs(alpha[i]) > abs(alpha[r]):
                        r = i
            t = ratios[r]
            leaving = basis[r]
            for i in range(m):
                beta[i] -= t * alpha[i]
            beta[r] = (upper[jq] - t) if at_upper[jq] else t
            at_upper[leaving] = hit_upper[r]
            at_upper[jq] = False
            _update_costs(T, d, r, q)
            _short_pivot(T, basis, nonbasic, r, q)
            since_refactor += 1
            if since_refactor >= refactor_every:
                if not _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
                    return 4, iters
                _reduced_costs(cost, basis, nonbasic, T, d)
                since_refactor = 0
            elif since_refactor % RESYNC_EVERY == 0:
                _resync_beta(rhs, upper, at_upper, basis, nonbasic, T, beta, A.shape[1])
                _reduced_costs(cost, basis, nonbasic, T, d)
        if t <= 1e-12:
            degenerate += 1
            if degenerate >= DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
            bland = False


def _solve_dual(c, A_ub, b_ub, A_eq, b_eq, lb, ub, max_iter,
                refactor_every=SHORT_REFACTOR_EVERY) -> LpResult | None:
    n = c.size
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    m = m1 + m2
    A = np.ascontiguousarray(np.vstack([A_ub, A_eq]))
    rhs = np.concatenate([b_ub - A_ub @ lb, b_eq - A_eq @ lb])
    upper = np.concatenate([ub - lb, np.full(m1, np.inf), np.zeros(m2)])
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m, dtype=np.int64)
    nonbasic = np.arange(n, dtype=np.int64)
    at_upper = np.zeros(n + m, dtype=bool)
    at_upper[:n] = (c < 0) & (upper[:n] > 0)
    T = A.copy()
    beta = rhs - A @ np.where(at_upper[:n], upper[:n], 0.0)
    ptol = 1e-9
    iters = 0
    # dual phase, then primal clean-up of any reduced-cost drift; repeat
    # until both hold after a fresh factorisation
    for _ in range(5):
        code, iters = _dual_run(A, rhs, T, beta, basis, nonbasic, at_upper, upper, cost,
                                max_iter, iters, ptol, refactor_every)
        if code == 1:
            return LpResult(INFEASIBLE, np.nan, None, iters)
        if code == 2:
            break
        if code == 4 or not _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
            return None
        if _primal_infeasible(beta, basis, upper, ptol):
            continue
        code, iters = _primal_run(A, rhs, T, beta, basis, nonbasic, at_upper, upper, cost,
                                  max_iter, iters, refactor_every)
        if code == 2:
            break
        if code == 4 or not _short_refactor(A, rhs, upper, at_upper, basis, nonbasic, T, beta):
            return None
        if not _primal_infeasible(beta, basis, upper, ptol):
            code = 0
            break
    else:
        code = 2
    v = np.where(at_upper, upper, 0.0)
    v[basis] = beta
    x = np.clip(lb + v[:n], lb, ub)
    if code != 0:
        return LpResult(ITERATION_LIMIT, np.nan, x, iters)
    return LpResult(OPTIMAL, float(c @ x), x, iters)


def _primal_infeasible(beta, basis, upper, tol) -> bool:
    return bool(np.any(beta < -tol) or np.any(beta > upper[basis] + tol))


def solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lb=None, ub=None,
          max_iter: int | None = None, method: str = "dual") -> LpResult:
    """Solve a bounded LP; see module docstring.

    ``method="dual"`` (default) runs the dual simplex on the short tableau;
    ``"primal"`` runs the two-phase primal simplex on the full tableau.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
        raise ValueError("all variable bounds must be finite")
    if np.any(lb > ub + 1e-12):
        return LpResult(INFEASIBLE, np.nan, None, 0)
    ub = np.maximum(ub, lb)
    if max_iter is None:
        max_iter = 50 * (A_ub.shape[0] + A_eq.shape[0] + n)
    if method == "dual":
        for every in (SHORT_REFACTOR_EVERY, 50):
            res = _solve_dual(c, A_ub, b_ub, A_eq, b_eq, lb, ub, max_iter, every)
            if res is not None:
                return res
        # the basis went singular; the full-tableau method is slower but sturdier
        method = "primal"
    if method == "primal":
        return _solve_primal(c, A_ub, b_ub, A_eq, b_eq, lb, ub, max_iter)
    raise ValueError(f"unknown method {method!r}")
