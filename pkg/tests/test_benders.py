"""Benders decomposition checks: hand-worked toys, agreement with plain
branch and bound on random two-stage problems, and cut validity."""

import numpy as np
import pytest

from ecsplan.solver.benders import BendersState, benders_solve
from ecsplan.solver.lp import OPTIMAL, INFEASIBLE, LpBuilder, solve_lp
from ecsplan.solver.milp import (
    MILP_INFEASIBLE,
    MILP_OPTIMAL,
    MilpProblem,
    solve_milp,
)


class Target:
    def __init__(self, problem, var_block):
        self.problem = problem
        self.var_block = np.asarray(var_block, dtype=np.int64)


def two_stage(rng, n_x=4, n_blocks=2, n_y=3, m_rows=3):
    """Random master binaries + per-block continuous vars with >= rows."""
    b_ = LpBuilder()
    xs = [b_.add_var(0.0, 1.0, obj=rng.uniform(-2, 2), name=f"x{i}") for i in range(n_x)]
    var_block = [-1] * n_x
    for b in range(n_blocks):
        ys = [
            b_.add_var(0.0, rng.uniform(1, 3), obj=rng.uniform(0.1, 2), name=f"y{b}_{j}")
            for j in range(n_y)
        ]
        var_block += [b] * n_y
        for _ in range(m_rows):
            coeffs = {}
            for j in ys:
                if rng.random() < 0.8:
                    coeffs[j] = rng.uniform(-1, 2)
            if not coeffs:
                coeffs[ys[0]] = 1.0
            for i in xs:
                if rng.random() < 0.5:
                    coeffs[i] = rng.uniform(-1, 1)
            b_.add_row(coeffs, rng.uniform(-1.5, 1.0), np.inf)
    lp = b_.build()
    return Target(MilpProblem(lp=lp, binary=np.arange(n_x)), var_block)


def test_value_function_toy_converges_fast():
    # min x + y  s.t. 2x + y >= 3, x binary, y >= 0.
    # Q(0) = 3, Q(1) = 1, so x = 1 with total 2.
    b = LpBuilder()
    x = b.add_var(0.0, 1.0, obj=1.0, name="x")
    y = b.add_var(0.0, np.inf, obj=1.0, name="y")
    b.add_row({x: 2.0, y: 1.0}, 3.0, np.inf)
    target = Target(MilpProblem(lp=b.build(), binary=np.array([x])), [-1, 0])
    res, state = benders_solve(target)
    assert res.status == MILP_OPTIMAL
    assert res.objective == pytest.approx(2.0, abs=1e-9)
    assert res.x[x] == pytest.approx(1.0)
    assert res.x[y] == pytest.approx(1.0, abs=1e-9)
    assert state.iterations <= 3
    assert [c.kind for c in state.cuts] == ["optimality"]
    # The recorded cut is eta + 2x >= 3 in original-variable indexing.
    assert state.cuts[0].lin == {x: pytest.approx(2.0)}
    assert state.cuts[0].rhs == pytest.approx(3.0)


def test_feasibility_cut_forces_master_switch():
    # min x  s.t. 5x + y >= 2, 0 <= y <= 1: x = 0 leaves the block empty,
    # so one Farkas cut (x >= 0.4 after scaling) must flip x to 1.
    b = LpBuilder()
    x = b.add_var(0.0, 1.0, obj=1.0, name="x")
    y = b.add_var(0.0, 1.0, obj=0.0, name="y")
    b.add_row({x: 5.0, y: 1.0}, 2.0, np.inf)
    target = Target(MilpProblem(lp=b.build(), binary=np.array([x])), [-1, 0])
    res, state = benders_solve(target)
    assert res.status == MILP_OPTIMAL
    assert res.objective == pytest.approx(1.0, abs=1e-9)
    assert res.x[x] == pytest.approx(1.0)
    kinds = [c.kind for c in state.cuts]
    assert kinds.count("feasibility") == 1
    cut = state.cuts[0]
    # Normalized certificate satisfies lin . x > rhs only at x = 1.
    assert cut.lin[x] * 1.0 >= cut.rhs - 1e-9
    assert cut.lin[x] * 0.0 < cut.rhs


def test_toy_infeasible_for_all_masters():
    b = LpBuilder()
    x = b.add_var(0.0, 1.0, obj=1.0, name="x")
    y = b.add_var(0.0, 1.0, obj=0.0, name="y")
    b.add_row({x: 1.0, y: 1.0}, 5.0, np.inf)
    target = Target(MilpProblem(lp=b.build(), binary=np.array([x])), [-1, 0])
    res, _ = benders_solve(target)
    assert res.status == MILP_INFEASIBLE


@pytest.mark.parametrize("single_cut", [False, True])
def test_matches_branch_and_bound_on_random_instances(single_cut):
    rng = np.random.default_rng(7)
    solved = 0
    for _ in range(20):
        target = two_stage(rng)
        direct = solve_milp(target.problem)
        res, state = benders_solve(target, single_cut=single_cut)
        assert res.status == direct.status
        if direct.status != MILP_OPTIMAL:
            continue
        solved += 1
        assert res.objective == pytest.approx(direct.objective, abs=1e-6)
        # The reported point must re-evaluate to the reported objective.
        assert target.problem.lp.c @ res.x == pytest.approx(res.objective, abs=1e-6)
        assert res.bound <= res.objective + 1e-7
    assert solved >= 10


def block_value(target, b, x_master_full):
    """Solve block b's LP directly at a full master assignment."""
    lp = target.problem.lp
    var_block = target.var_block
    mvars = np.flatnonzero(var_block == -1)
    bvars = np.flatnonzero(var_block == b)
    builder = LpBuilder()
    remap = {}
    for j in bvars:
        remap[j] = builder.add_var(lp.var_lower[j], lp.var_upper[j], obj=lp.c[j])
    mat = lp.matrix().tocsr()
    for r in range(lp.n_rows):
        row = mat.getrow(r)
        cols = row.indices
        if not any(var_block[c] == b for c in cols):
            continue
        coeffs = {}
        shift = 0.0
        for c, v in zip(cols, row.data):
            if var_block[c] == b:
                coeffs[remap[c]] = v
            else:
                shift += v * x_master_full[c]
        builder.add_row(coeffs, lp.row_lower[r] - shift, lp.row_upper[r] - shift)
    res = solve_lp(builder.build())
    if res.status == INFEASIBLE:
        return None
    assert res.status == OPTIMAL
    return res.objective


def test_cuts_underestimate_value_function_everywhere():
    rng = np.random.default_rng(21)
    checked_opt = checked_feas = 0
    for trial in range(10):
        target = two_stage(rng, n_x=3, n_blocks=2, n_y=2, m_rows=2)
        if trial >= 6:
            # Tighten rows so some master points have empty blocks,
            # which exercises the feasibility cuts.
            target.problem.lp.row_lower = target.problem.lp.row_lower + rng.uniform(
                0.5, 2.5, size=target.problem.lp.n_rows
            )
        res, state = benders_solve(target)
        n_x = int(np.sum(target.var_block == -1))
        for bits in range(2**n_x):
            x_full = np.zeros(target.problem.lp.n_cols)
            for i in range(n_x):
                x_full[i] = (bits >> i) & 1
            values = {
                b: block_value(target, b, x_full)
                for b in range(state.n_blocks)
            }
            for cut in state.cuts:
                lhs = sum(coef * x_full[j] for j, coef in cut.lin.items())
                if cut.kind == "feasibility":
                    # Feasible block => cut holds; violated cut => empty block.
                    if values[cut.block] is not None:
                        assert lhs >= cut.rhs - 1e-7
                        checked_feas += 1
                    elif lhs < cut.rhs - 1e-7:
                        assert values[cut.block] is None
                        checked_feas += 1
                else:
                    blocks = (
                        [cut.block]
                        if cut.block >= 0
                        else list(range(state.n_blocks))
                    )
                    if any(values[b] is None for b in blocks):
                        continue
                    q = sum(values[b] for b in blocks)
                    assert q >= cut.rhs - lhs - 1e-7
                    checked_opt += 1
    assert checked_opt > 50 and checked_feas > 0


def test_no_blocks_falls_back_to_plain_milp():
    b = LpBuilder()
    x0 = b.add_var(0.0, 1.0, obj=-1.0)
    x1 = b.add_var(0.0, 1.0, obj=-2.0)
    b.add_row({x0: 1.0, x1: 1.0}, -np.inf, 1.0)
    target = Target(MilpProblem(lp=b.build(), binary=np.array([x0, x1])), [-1, -1])
    res, state = benders_solve(target)
    assert res.status == MILP_OPTIMAL
    assert res.objective == pytest.approx(-2.0)
    assert isinstance(state, BendersState) and state.n_blocks == 0
