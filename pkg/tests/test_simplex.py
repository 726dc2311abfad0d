from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from psplit import simplex
from psplit.simplex import INFEASIBLE, OPTIMAL

METHODS = ["dual", "primal"]


def random_lp(seed, m=None, n=None, eq=0):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 12))
    m = m if m is not None else int(rng.integers(1, 15))
    A = np.round(rng.normal(size=(m, n)), 2)
    x0 = rng.uniform(-1, 1, n)
    b = A @ x0 + rng.uniform(0, 1, m)
    E = np.round(rng.normal(size=(eq, n)), 2)
    e = E @ x0
    return rng.normal(size=n), A, b, E, e, -2 * np.ones(n), 2 * np.ones(n)


def highs(c, A, b, E, e, lb, ub):
    return linprog(c, A_ub=A, b_ub=b, A_eq=E if len(e) else None, b_eq=e if len(e) else None,
                   bounds=list(zip(lb, ub)), method="highs")


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("seed", range(40))
def test_matches_highs(seed, method):
    c, A, b, E, e, lb, ub = random_lp(seed, eq=seed % 3)
    ref = highs(c, A, b, E, e, lb, ub)
    res = simplex.solve(c, A, b, E, e, lb, ub, method=method)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(ref.fun, abs=1e-8)
    assert np.all(A @ res.x <= b + 1e-7)
    assert np.allclose(E @ res.x, e, atol=1e-7)
    assert np.all(res.x >= lb - 1e-9) and np.all(res.x <= ub + 1e-9)


@pytest.mark.parametrize("method", METHODS)
def test_detects_infeasibility(method):
    A = np.array([[1.0, 1.0], [-1.0, -1.0]])
    b = np.array([1.0, -1.5])
    res = simplex.solve(np.zeros(2), A, b, lb=np.zeros(2), ub=np.ones(2) * 5, method=method)
    assert res.status == INFEASIBLE and res.x is None


def test_feasible_lp_with_tiny_pivots_is_not_called_infeasible():
    # an outer-approximation node LP from a clustering instance whose dual
    # pass once ended on a row with only sub-tolerance entries
    data = np.load(Path(__file__).parent / "data" / "near_singular_lp.npz")
    args = [data[k] for k in ("c", "A_ub", "b_ub", "A_eq", "b_eq", "lb", "ub")]
    ref = highs(*args)
    res = simplex.solve(*args)
    assert ref.status == 0
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(ref.fun, rel=1e-8)


@pytest.mark.parametrize("method", METHODS)
def test_box_only_and_fixed_variables(method):
    res = simplex.solve([1.0, -1.0, 0.0], lb=[0, 0, 3], ub=[1, 2, 3], method=method)
    assert res.objective == pytest.approx(-2.0)
    assert res.x.tolist() == pytest.approx([0.0, 2.0, 3.0])


def test_inverted_bounds_are_infeasible_and_infinite_bounds_rejected():
    assert simplex.solve([1.0], lb=[1.0], ub=[0.0]).status == INFEASIBLE
    with pytest.raises(ValueError):
        simplex.solve([1.0], lb=[0.0], ub=[np.inf])


def test_degenerate_problem_terminates():
    # many constraints active at the optimum vertex
    n = 6
    A = np.vstack([np.eye(n), np.ones((1, n)), -np.eye(n), np.tril(np.ones((n, n)))])
    b = np.concatenate([np.zeros(n), [0.0], np.zeros(n), np.zeros(n)])
    res = simplex.solve(-np.ones(n), A, b, lb=-np.ones(n), ub=np.ones(n))
    assert res.status == OPTIMAL and res.objective == pytest.approx(0.0, abs=1e-12)


def test_deterministic():
    c, A, b, E, e, lb, ub = random_lp(3, m=30, n=20, eq=2)
    r1 = simplex.solve(c, A, b, E, e, lb, ub)
    r2 = simplex.solve(c, A, b, E, e, lb, ub)
    assert r1.iterations == r2.iterations and np.array_equal(r1.x, r2.x)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 40), st.integers(1, 15), st.integers(0, 3))
def test_dual_agrees_with_highs_on_random_lps(seed, m, n, eq):
    c, A, b, E, e, lb, ub = random_lp(seed, m, n, min(eq, n - 1))
    ref = highs(c, A, b, E, e, lb, ub)
    res = simplex.solve(c, A, b, E, e, lb, ub)
    if ref.status == 2:
        assert res.status == INFEASIBLE
    else:
        assert res.objective == pytest.approx(ref.fun, abs=1e-7)
