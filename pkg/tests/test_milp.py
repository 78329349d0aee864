"""Unit tests for branch and bound against exhaustive enumeration."""

import numpy as np
import pytest

from ecsplan.solver.lp import LpBuilder
from ecsplan.solver.milp import (
    MILP_INFEASIBLE,
    MILP_OPTIMAL,
    MilpProblem,
    solve_milp,
)
from generators import random_binary_milp

INF = float("inf")


def enumerate_binary(p: MilpProblem):
    """Oracle: test all 2^n assignments against the row system directly."""
    lp = p.lp
    n = lp.n_cols
    a = np.zeros((lp.n_rows, n))
    a[lp.a_rows, lp.a_cols] += lp.a_vals
    best_obj, best_x = None, None
    for mask in range(1 << n):
        x = np.array([(mask >> j) & 1 for j in range(n)], dtype=float)
        act = a @ x
        if np.any(act < lp.row_lower - 1e-9) or np.any(act > lp.row_upper + 1e-9):
            continue
        obj = float(lp.c @ x)
        if best_obj is None or obj < best_obj - 1e-12:
            best_obj, best_x = obj, x
    return best_obj, best_x


def knapsack_problem():
    b = LpBuilder()
    x1 = b.add_var(0.0, 1.0, obj=-3.0)
    x2 = b.add_var(0.0, 1.0, obj=-2.0)
    b.add_row({x1: 1.0, x2: 1.0}, -INF, 1.0)
    return MilpProblem(lp=b.build(), binary=np.array([x1, x2]))


def test_knapsack_takes_heavier_item():
    res = solve_milp(knapsack_problem())
    assert res.status == MILP_OPTIMAL
    assert res.objective == pytest.approx(-3.0)
    assert res.x[0] == pytest.approx(1.0)
    assert res.x[1] == pytest.approx(0.0)


def test_integral_relaxation_closes_at_root():
    # 3x3 assignment problem: totally unimodular, LP optimum is integral.
    b = LpBuilder()
    cost = [[4.0, 2.0, 8.0], [4.0, 3.0, 7.0], [3.0, 1.0, 6.0]]
    x = [[b.add_var(0.0, 1.0, obj=cost[i][j]) for j in range(3)] for i in range(3)]
    for i in range(3):
        b.add_row({x[i][j]: 1.0 for j in range(3)}, 1.0, 1.0)
    for j in range(3):
        b.add_row({x[i][j]: 1.0 for i in range(3)}, 1.0, 1.0)
    p = MilpProblem(lp=b.build(), binary=np.arange(9))
    res = solve_milp(p, heuristics=False)
    assert res.status == MILP_OPTIMAL
    assert res.nodes == 1
    assert res.objective == pytest.approx(12.0)


def test_infeasible_binary_system():
    b = LpBuilder()
    x1 = b.add_var(0.0, 1.0, obj=1.0)
    x2 = b.add_var(0.0, 1.0, obj=1.0)
    b.add_row({x1: 1.0, x2: 1.0}, 2.5, INF)
    p = MilpProblem(lp=b.build(), binary=np.array([x1, x2]))
    res = solve_milp(p)
    assert res.status == MILP_INFEASIBLE


def test_random_binary_problems_match_enumeration():
    rng = np.random.default_rng(101)
    for trial in range(25):
        p = random_binary_milp(rng, n=int(rng.integers(6, 13)), m=int(rng.integers(4, 9)))
        res = solve_milp(p)
        truth_obj, _ = enumerate_binary(p)
        assert truth_obj is not None
        assert res.status == MILP_OPTIMAL, f"trial {trial}"
        assert abs(res.objective - truth_obj) <= 1e-6 * max(1.0, abs(truth_obj)), (
            f"trial {trial}: got {res.objective}, want {truth_obj}"
        )
        assert res.bound <= res.objective + 1e-9


def test_warm_start_installs_incumbent():
    rng = np.random.default_rng(103)
    p = random_binary_milp(rng, n=10, m=6)
    first = solve_milp(p)
    assert first.status == MILP_OPTIMAL
    warm = solve_milp(p, warm_start=first.x)
    assert warm.status == MILP_OPTIMAL
    assert warm.objective == pytest.approx(first.objective)


def test_gap_tolerance_returns_bounded_incumbent():
    rng = np.random.default_rng(107)
    for _ in range(5):
        p = random_binary_milp(rng, n=12, m=7)
        exact = solve_milp(p)
        loose = solve_milp(p, gap_tol=0.5)
        assert loose.status == MILP_OPTIMAL
        assert loose.gap <= 0.5 + 1e-12
        assert loose.bound <= exact.objective + 1e-9
        assert loose.objective >= exact.objective - 1e-9


def test_deterministic_replay():
    rng = np.random.default_rng(109)
    p = random_binary_milp(rng, n=11, m=6)
    a = solve_milp(p)
    b = solve_milp(p)
    assert a.objective == b.objective
    assert a.nodes == b.nodes
    assert np.array_equal(a.x, b.x)
