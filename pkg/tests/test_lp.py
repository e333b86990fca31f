import numpy as np
import pytest
from scipy.optimize import linprog

from mdncee.lp import solve_lp


def reference(c, A, b, lb, ub):
    return linprog(c, A_ub=A, b_ub=b, bounds=list(zip(lb, ub)), method="highs")


def test_small_known_optimum():
    # min -x - y st x + y <= 1.5, boxes [0,1]^2
    res = solve_lp([-1.0, -1.0], [[1.0, 1.0]], [1.5], [0.0, 0.0], [1.0, 1.0])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-1.5, abs=1e-9)


def test_infeasible_detected():
    res = solve_lp([1.0], [[1.0], [-1.0]], [-2.0, 1.0], [-10.0], [10.0])
    assert res.status == "infeasible"


def test_degenerate_redundant_rows():
    A = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
    b = [1.0, 1.0, 1.0, 0.0]
    res = solve_lp([-1.0, -1.0], A, b, [0.0, 0.0], [5.0, 5.0])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(-1.0, abs=1e-9)


def test_equality_via_opposing_rows():
    # x + y <= 2 and -(x + y) <= -2 pin x + y = 2
    res = solve_lp([1.0, 2.0], [[1, 1], [-1, -1]], [2.0, -2.0], [0.0, 0.0], [3.0, 3.0])
    assert res.status == "optimal"
    assert res.objective == pytest.approx(2.0, abs=1e-9)


def test_fuzz_against_scipy():
    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 20))
        A = rng.normal(size=(m, n)) * rng.choice([1e-3, 1.0, 1e3], size=(m, 1))
        lb = rng.uniform(-4, 0, n)
        ub = lb + rng.uniform(0.1, 8, n)
        b = A @ rng.uniform(lb, ub) + rng.uniform(-1, 2, m)
        c = rng.normal(size=n)
        ours = solve_lp(c, A, b, lb, ub)
        ref = reference(c, A, b, lb, ub)
        if ref.status == 0:
            assert ours.status == "optimal"
            assert ours.objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-7)
            assert np.all(A @ ours.x <= b + 1e-7)
            checked += 1
        elif ref.status == 2:
            assert ours.status == "infeasible"
    assert checked > 50


def test_wide_coefficient_spread():
    # master-like scaling: one row has coefficients spanning ten orders
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = 5
        A = np.vstack([
            np.array([1e5, 1e-3, 2e4, -6e5, 1.0]),
            rng.normal(size=(4, n)),
        ])
        lb = np.full(n, -2.0)
        ub = np.full(n, 2.0)
        b = A @ rng.uniform(lb, ub) + rng.uniform(0.1, 1.0, 5)
        c = rng.normal(size=n)
        ours = solve_lp(c, A, b, lb, ub)
        ref = reference(c, A, b, lb, ub)
        assert ours.status == "optimal" and ref.status == 0
        assert ours.objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-6)
