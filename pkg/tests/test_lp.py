"""Unit tests for the bounded-variable revised simplex."""

import numpy as np
import pytest
from scipy.optimize import linprog

from ecsplan.solver.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpBuilder,
    solve_lp,
)
from generators import random_infeasible_lp, random_lp, random_unbounded_lp

INF = float("inf")


def scipy_solve(lp):
    """Cross-check via scipy's HiGHS backend (two-sided rows split)."""
    a = np.zeros((lp.n_rows, lp.n_cols))
    a[lp.a_rows, lp.a_cols] += lp.a_vals
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for r in range(lp.n_rows):
        lo, hi = lp.row_lower[r], lp.row_upper[r]
        if np.isfinite(lo) and lo == hi:
            a_eq.append(a[r])
            b_eq.append(lo)
            continue
        if np.isfinite(hi):
            a_ub.append(a[r])
            b_ub.append(hi)
        if np.isfinite(lo):
            a_ub.append(-a[r])
            b_ub.append(-lo)
    bounds = [
        (
            None if not np.isfinite(lp.var_lower[j]) else lp.var_lower[j],
            None if not np.isfinite(lp.var_upper[j]) else lp.var_upper[j],
        )
        for j in range(lp.n_cols)
    ]
    return linprog(
        lp.c,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )


def dual_objective(lp, res):
    """Objective of the bound-form dual from returned duals/reduced costs."""
    total = 0.0
    for r in range(lp.n_rows):
        y = res.duals[r]
        if y > 0:
            total += y * lp.row_lower[r]
        elif y < 0:
            total += y * lp.row_upper[r]
    for j in range(lp.n_cols):
        d = res.reduced_costs[j]
        if d > 1e-9:
            total += d * lp.var_lower[j]
        elif d < -1e-9:
            total += d * lp.var_upper[j]
    return total


# ---------------------------------------------------------------- basics


def test_min_x_above_three():
    b = LpBuilder()
    x = b.add_var(-INF, INF, obj=1.0)
    b.add_row({x: 1.0}, 3.0, INF)
    res = solve_lp(b.build())
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(3.0)
    assert res.x[0] == pytest.approx(3.0)
    assert res.duals[0] == pytest.approx(1.0)


def test_max_x_below_five():
    b = LpBuilder()
    x = b.add_var(0.0, INF, obj=-1.0)
    b.add_row({x: 1.0}, -INF, 5.0)
    res = solve_lp(b.build())
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(5.0)
    assert res.duals[0] == pytest.approx(-1.0)


def test_pure_box_problem():
    b = LpBuilder()
    b.add_var(0.0, 5.0, obj=-1.0)
    b.add_var(-2.0, 2.0, obj=1.0)
    res = solve_lp(b.build())
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-7.0)


def test_infeasible_bounds_detected():
    b = LpBuilder()
    x = b.add_var(0.0, 1.0)
    b.add_row({x: 1.0}, 2.0, INF)
    res = solve_lp(b.build())
    assert res.status == INFEASIBLE


def test_unbounded_detected():
    b = LpBuilder()
    x = b.add_var(-INF, INF, obj=1.0)
    y = b.add_var(0.0, INF, obj=-2.0)
    b.add_row({x: 1.0, y: -1.0}, 0.0, 0.0)
    res = solve_lp(b.build())
    assert res.status == UNBOUNDED


def test_fixed_variable_equality_mix():
    b = LpBuilder()
    x = b.add_var(2.0, 2.0, obj=1.0)
    y = b.add_var(0.0, 10.0, obj=1.0)
    b.add_row({x: 1.0, y: 1.0}, 5.0, 5.0)
    res = solve_lp(b.build())
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(2.0)
    assert res.x[1] == pytest.approx(3.0)


def test_beale_cycling_example_terminates():
    # Classic degenerate LP that cycles under naive Dantzig pricing.
    b = LpBuilder()
    x = [b.add_var(0.0, INF) for _ in range(4)]
    for j, cj in zip(x, (-0.75, 150.0, -0.02, 6.0)):
        b.set_objective(j, cj)
    b.add_row({x[0]: 0.25, x[1]: -60.0, x[2]: -1.0 / 25, x[3]: 9.0}, -INF, 0.0)
    b.add_row({x[0]: 0.5, x[1]: -90.0, x[2]: -1.0 / 50, x[3]: 3.0}, -INF, 0.0)
    b.add_row({x[2]: 1.0}, -INF, 1.0)
    res = solve_lp(b.build())
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(-0.05)


# ---------------------------------------------------------- random sweeps


def test_random_lps_match_reference_and_scipy():
    from reference_lp import solve_reference

    rng = np.random.default_rng(7)
    for trial in range(30):
        lp = random_lp(rng, m=int(rng.integers(5, 21)), n=int(rng.integers(8, 31)))
        res = solve_lp(lp)
        ref_status, ref_obj, _ = solve_reference(lp)
        sp = scipy_solve(lp)
        assert res.status == OPTIMAL, f"trial {trial}"
        assert ref_status == "optimal"
        assert sp.status == 0
        scale = max(1.0, abs(ref_obj))
        assert abs(res.objective - ref_obj) <= 1e-6 * scale, f"trial {trial}"
        assert abs(res.objective - sp.fun) <= 1e-6 * scale, f"trial {trial}"
        # Primal feasibility of the returned point.
        a = lp.matrix()
        act = a @ res.x
        assert np.all(act >= lp.row_lower - 1e-6)
        assert np.all(act <= lp.row_upper + 1e-6)
        assert np.all(res.x >= lp.var_lower - 1e-9)
        assert np.all(res.x <= lp.var_upper + 1e-9)


def test_duality_gap_zero_on_random_lps():
    rng = np.random.default_rng(11)
    for _ in range(20):
        lp = random_lp(rng, m=15, n=25)
        res = solve_lp(lp)
        assert res.status == OPTIMAL
        gap = abs(res.objective - dual_objective(lp, res))
        assert gap <= 1e-6 * max(1.0, abs(res.objective))


def test_random_infeasible_lps_certified():
    rng = np.random.default_rng(13)
    for _ in range(15):
        lp = random_infeasible_lp(rng)
        res = solve_lp(lp)
        assert res.status == INFEASIBLE
        y = res.farkas
        assert y is not None
        # Re-verify the certificate inequality from scratch.
        a = lp.matrix()
        g = a.T @ y
        lval = sum(
            y[r] * (lp.row_lower[r] if y[r] > 0 else lp.row_upper[r])
            for r in range(lp.n_rows)
            if abs(y[r]) > 1e-12
        )
        box = sum(
            g[j] * (lp.var_upper[j] if g[j] > 0 else lp.var_lower[j])
            for j in range(lp.n_cols)
            if abs(g[j]) > 1e-12
        )
        assert lval > box


def test_random_unbounded_lps_detected():
    rng = np.random.default_rng(17)
    for _ in range(10):
        lp = random_unbounded_lp(rng)
        res = solve_lp(lp)
        assert res.status == UNBOUNDED


def test_badly_scaled_lp_matches_scipy():
    rng = np.random.default_rng(19)
    for _ in range(8):
        lp = random_lp(rng, m=12, n=18, scale=1e5)
        res = solve_lp(lp)
        sp = scipy_solve(lp)
        assert res.status == OPTIMAL and sp.status == 0
        assert abs(res.objective - sp.fun) <= 1e-6 * max(1.0, abs(sp.fun))


def test_warm_start_after_bound_change():
    rng = np.random.default_rng(23)
    for _ in range(10):
        lp = random_lp(rng, m=10, n=16)
        first = solve_lp(lp)
        assert first.status == OPTIMAL
        # Tighten one variable's upper bound below its optimal value.
        j = int(np.argmax(first.x - lp.var_lower))
        hi = lp.var_upper.copy()
        hi[j] = (first.x[j] + lp.var_lower[j]) / 2.0
        tightened = type(lp)(
            c=lp.c,
            n_rows=lp.n_rows,
            a_rows=lp.a_rows,
            a_cols=lp.a_cols,
            a_vals=lp.a_vals,
            row_lower=lp.row_lower,
            row_upper=lp.row_upper,
            var_lower=lp.var_lower,
            var_upper=hi,
        )
        warm = solve_lp(tightened, warm_basis=first.basis)
        cold = solve_lp(tightened)
        assert warm.status == cold.status
        if cold.status == OPTIMAL:
            assert warm.objective == pytest.approx(cold.objective, rel=1e-9, abs=1e-9)
            assert warm.iterations <= max(cold.iterations, 5)
