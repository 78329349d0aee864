"""Benders decomposition for block-decomposable MILPs.

The master carries every integer variable (first- and second-stage alike)
plus one value-function surrogate per continuous block; subproblems carry
the continuous variables of one block each and are plain LPs once the
master point is fixed.  Optimality cuts come from subproblem duals,
feasibility cuts from Farkas certificates:

    optimality:   eta_b + (T_b' y)' x  >=  v_b + (T_b' y)' x_hat
    feasibility:        (T_b' y)' x  >=  lval(y) - max over block box (y'W_b)

Any object exposing ``problem`` (a MilpProblem) and ``var_block`` (array
with -1 for master variables, block index otherwise) can be solved; the
planning model handles and two-stage program wrappers both qualify.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    SolverError,
    solve_lp,
)
from .milp import (
    MILP_INFEASIBLE,
    MILP_NO_INCUMBENT,
    MILP_OPTIMAL,
    MILP_TIME_LIMIT,
    MILP_UNBOUNDED,
    MilpProblem,
    MilpResult,
    solve_milp,
)
from .settings import DEFAULT_SETTINGS, SolverSettings

_INF = float("inf")


@dataclass
class BendersCut:
    """One master row: sum(lin[j] * x_j) [+ eta of ``block``] >= rhs."""

    kind: str  # "optimality" | "feasibility"
    block: int
    lin: dict[int, float]  # keyed by original variable index
    rhs: float


@dataclass
class BendersState:
    cuts: list[BendersCut] = field(default_factory=list)
    lower_bounds: list[float] = field(default_factory=list)
    upper_bounds: list[float] = field(default_factory=list)
    iterations: int = 0
    master_nodes: int = 0
    x_ws: np.ndarray | None = None
    master_vars: np.ndarray | None = None
    n_blocks: int = 0


class _Block:
    """Subproblem data for one continuous block."""

    def __init__(self, bvars, brows, lp: LinearProgram, mvars):
        self.bvars = bvars
        self.rows = brows
        vpos = {int(j): i for i, j in enumerate(bvars)}
        mpos = {int(j): i for i, j in enumerate(mvars)}
        w_r, w_c, w_v = [], [], []
        t_r, t_c, t_v = [], [], []
        rowpos = {int(r): i for i, r in enumerate(brows)}
        for r, c, v in zip(lp.a_rows, lp.a_cols, lp.a_vals):
            if int(r) not in rowpos:
                continue
            if int(c) in vpos:
                w_r.append(rowpos[int(r)])
                w_c.append(vpos[int(c)])
                w_v.append(v)
            else:
                t_r.append(rowpos[int(r)])
                t_c.append(mpos[int(c)])
                t_v.append(v)
        nr = len(brows)
        self.w = sp.csr_matrix((w_v, (w_r, w_c)), shape=(nr, len(bvars)))
        self.t = sp.csr_matrix((t_v, (t_r, t_c)), shape=(nr, len(mvars)))
        self.row_lower = lp.row_lower[brows]
        self.row_upper = lp.row_upper[brows]
        self.d = lp.c[bvars]
        self.var_lower = lp.var_lower[bvars]
        self.var_upper = lp.var_upper[bvars]
        self.has_cost = bool(np.any(self.d != 0.0))
        self.warm = None

    def eta_lower(self) -> float:
        lo = 0.0
        for dj, vl, vu in zip(self.d, self.var_lower, self.var_upper):
            if dj > 0:
                if not np.isfinite(vl):
                    raise SolverError("block recourse unbounded below; no eta bound")
                lo += dj * vl
            elif dj < 0:
                if not np.isfinite(vu):
                    raise SolverError("block recourse unbounded below; no eta bound")
                lo += dj * vu
        return lo

    def lp_at(self, x_master: np.ndarray) -> LinearProgram:
        shift = self.t @ x_master
        coo = self.w.tocoo()
        return LinearProgram(
            c=self.d,
            n_rows=self.w.shape[0],
            a_rows=coo.row,
            a_cols=coo.col,
            a_vals=coo.data,
            row_lower=self.row_lower - shift,
            row_upper=self.row_upper - shift,
            var_lower=self.var_lower,
            var_upper=self.var_upper,
        )

    def farkas_box_max(self, y: np.ndarray) -> float:
        g = self.w.T @ y
        total = 0.0
        for gj, vl, vu in zip(g, self.var_lower, self.var_upper):
            if gj > 1e-12:
                if not np.isfinite(vu):
                    raise SolverError("unbounded box in feasibility cut")
                total += gj * vu
            elif gj < -1e-12:
                if not np.isfinite(vl):
                    raise SolverError("unbounded box in feasibility cut")
                total += gj * vl
        return total


def _classify_rows(lp: LinearProgram, var_block: np.ndarray) -> np.ndarray:
    row_block = np.full(lp.n_rows, -1, dtype=np.int64)
    for r, c in zip(lp.a_rows, lp.a_cols):
        b = var_block[c]
        if b < 0:
            continue
        cur = row_block[r]
        if cur == -1:
            row_block[r] = b
        elif cur != b:
            raise SolverError(
                f"row {r} couples continuous blocks {cur} and {b}; "
                "not block-decomposable"
            )
    return row_block


def benders_solve(
    target,
    gap_tol: float | None = None,
    warm_start: dict[int, float] | np.ndarray | None = None,
    time_limit: float | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    single_cut: bool = False,
) -> tuple[MilpResult, BendersState]:
    """Iterate master/subproblems until the relative gap closes.

    ``gap_tol`` bounds the certified relative gap (default: exact to
    solver tolerance); the master MILP itself is always solved to
    optimality so the lower bound is valid.
    """
    problem: MilpProblem = target.problem if hasattr(target, "problem") else target
    var_block = np.asarray(target.var_block, dtype=np.int64)
    lp = problem.lp
    if gap_tol is None:
        gap_tol = settings.milp_gap_tol
    deadline = None if time_limit is None else time.monotonic() + time_limit

    if len(var_block) != lp.n_cols:
        raise SolverError("var_block length mismatch")
    if np.any(var_block[problem.binary] != -1):
        raise SolverError("integer variables must belong to the master")

    n_blocks = int(var_block.max()) + 1 if np.any(var_block >= 0) else 0
    state = BendersState(n_blocks=n_blocks)
    if n_blocks == 0:
        res = solve_milp(problem, gap_tol, warm_start, time_limit, settings)
        state.iterations = 1
        state.master_nodes = res.nodes
        return res, state

    row_block = _classify_rows(lp, var_block)
    mvars = np.flatnonzero(var_block == -1)
    state.master_vars = mvars
    mrows = np.flatnonzero(row_block == -1)
    blocks = [
        _Block(
            np.flatnonzero(var_block == b),
            np.flatnonzero(row_block == b),
            lp,
            mvars,
        )
        for b in range(n_blocks)
    ]

    # Master skeleton: master vars, then one eta per costed block (or one
    # aggregated eta in single-cut mode).
    n_m = len(mvars)
    costed = [b for b in range(n_blocks) if blocks[b].has_cost]
    if single_cut:
        eta_of: dict[int, int] = {b: n_m for b in costed}
        n_eta = 1 if costed else 0
        eta_lb = [sum(blocks[b].eta_lower() for b in costed)] if costed else []
    else:
        eta_of = {b: n_m + i for i, b in enumerate(costed)}
        n_eta = len(costed)
        eta_lb = [blocks[b].eta_lower() for b in costed]

    mpos = {int(j): i for i, j in enumerate(mvars)}
    base_r, base_c, base_v = [], [], []
    mrow_set = set(int(r) for r in mrows)
    for r, c, v in zip(lp.a_rows, lp.a_cols, lp.a_vals):
        if int(r) in mrow_set:
            base_r.append(int(np.searchsorted(mrows, r)))
            base_c.append(mpos[int(c)])
            base_v.append(v)
    master_c = np.concatenate([lp.c[mvars], np.zeros(n_eta)])
    if n_eta:
        master_c[n_m:] = 1.0
    master_lo = np.concatenate([lp.var_lower[mvars], np.asarray(eta_lb)])
    master_hi = np.concatenate([lp.var_upper[mvars], np.full(n_eta, _INF)])
    master_binary = np.array([mpos[int(j)] for j in problem.binary], dtype=np.int64)

    cut_rows: list[tuple[dict[int, float], float]] = []  # master-index lin, rhs

    def build_master() -> MilpProblem:
        rr = list(base_r)
        cc = list(base_c)
        vv = list(base_v)
        lo = list(lp.row_lower[mrows])
        hi = list(lp.row_upper[mrows])
        for lin, rhs in cut_rows:
            ridx = len(lo)
            for j, coef in lin.items():
                rr.append(ridx)
                cc.append(j)
                vv.append(coef)
            lo.append(rhs)
            hi.append(_INF)
        mlp = LinearProgram(
            c=master_c,
            n_rows=len(lo),
            a_rows=np.asarray(rr, dtype=np.int64),
            a_cols=np.asarray(cc, dtype=np.int64),
            a_vals=np.asarray(vv, dtype=float),
            row_lower=np.asarray(lo),
            row_upper=np.asarray(hi),
            var_lower=master_lo,
            var_upper=master_hi,
        )
        return MilpProblem(lp=mlp, binary=master_binary, priority=problem.priority)

    master_warm: dict[int, float] | None = None
    if warm_start is not None:
        if isinstance(warm_start, dict):
            master_warm = {
                mpos[int(j)]: float(v)
                for j, v in warm_start.items()
                if int(j) in mpos
            }
        else:
            master_warm = {
                mpos[int(j)]: float(warm_start[int(j)]) for j in problem.binary
            }

    ub_best = _INF
    incumbent_x: np.ndarray | None = None
    lb = -_INF

    def result(status: str) -> MilpResult:
        gap = _INF
        if incumbent_x is not None and np.isfinite(lb):
            gap = max((ub_best - lb) / max(abs(ub_best), 1e-9), 0.0)
        return MilpResult(
            status=status,
            objective=None if incumbent_x is None else ub_best,
            x=incumbent_x,
            bound=lb,
            gap=gap,
            nodes=state.master_nodes,
        )

    for it in range(settings.benders_max_iters):
        state.iterations = it + 1
        remaining = None if deadline is None else deadline - time.monotonic()
        if remaining is not None and remaining <= 0:
            return (
                result(MILP_TIME_LIMIT if incumbent_x is not None else MILP_NO_INCUMBENT),
                state,
            )
        mres = solve_milp(
            build_master(),
            gap_tol=settings.milp_gap_tol,
            warm_start=master_warm,
            time_limit=remaining,
            settings=settings,
        )
        state.master_nodes += mres.nodes
        if mres.status == MILP_INFEASIBLE:
            return MilpResult(status=MILP_INFEASIBLE, nodes=state.master_nodes), state
        if mres.status == MILP_UNBOUNDED:
            raise SolverError(
                "master problem unbounded; missing bounds on master variables"
            )
        if mres.status not in (MILP_OPTIMAL,):
            return (
                result(MILP_TIME_LIMIT if incumbent_x is not None else MILP_NO_INCUMBENT),
                state,
            )
        lb = max(lb, mres.bound)
        state.lower_bounds.append(lb)
        x_hat = mres.x[:n_m]
        eta_hat = mres.x[n_m:]
        master_warm = {int(j): float(round(mres.x[j])) for j in master_binary}
        state.x_ws = x_hat.copy()

        new_cuts = 0
        all_feasible = True
        total_v = 0.0
        block_solutions: list[np.ndarray | None] = [None] * n_blocks
        agg_lin: dict[int, float] = {}
        agg_rhs = 0.0
        for b, blk in enumerate(blocks):
            sub = solve_lp(blk.lp_at(x_hat), settings, warm_basis=blk.warm)
            if sub.status == OPTIMAL:
                blk.warm = sub.basis
            if sub.status == UNBOUNDED:
                raise SolverError(
                    f"subproblem for block {b} is unbounded; modeling error"
                )
            if sub.status == INFEASIBLE:
                all_feasible = False
                y = sub.farkas
                if y is None:
                    raise SolverError(
                        f"block {b}: no usable infeasibility certificate"
                    )
                lval = 0.0
                for r in range(len(y)):
                    if y[r] > 1e-12:
                        lval += y[r] * blk.row_lower[r]
                    elif y[r] < -1e-12:
                        lval += y[r] * blk.row_upper[r]
                g = blk.t.T @ y  # master coefficients
                rhs = lval - blk.farkas_box_max(y)
                lin = {
                    int(i): float(gv)
                    for i, gv in enumerate(g)
                    if abs(gv) > 1e-12
                }
                cut_rows.append((lin, rhs))
                state.cuts.append(
                    BendersCut(
                        "feasibility",
                        b,
                        {int(mvars[i]): v for i, v in lin.items()},
                        rhs,
                    )
                )
                new_cuts += 1
                continue
            if sub.status != OPTIMAL:
                raise SolverError(f"block {b} subproblem status {sub.status}")
            v = float(sub.objective)
            total_v += v
            block_solutions[b] = sub.x
            if not blk.has_cost:
                continue
            g = blk.t.T @ sub.duals
            rhs = v + float(g @ x_hat)
            lin = {int(i): float(gv) for i, gv in enumerate(g) if abs(gv) > 1e-12}
            if single_cut:
                agg_rhs += rhs
                for i, gv in lin.items():
                    agg_lin[i] = agg_lin.get(i, 0.0) + gv
            else:
                eta_val = eta_hat[eta_of[b] - n_m]
                if v > eta_val + 1e-9 * max(1.0, abs(v)):
                    row = dict(lin)
                    row[eta_of[b]] = 1.0
                    cut_rows.append((row, rhs))
                    state.cuts.append(
                        BendersCut(
                            "optimality",
                            b,
                            {int(mvars[i]): vv for i, vv in lin.items()},
                            rhs,
                        )
                    )
                    new_cuts += 1
        if single_cut and costed and all_feasible:
            eta_val = eta_hat[0] if n_eta else 0.0
            v_costed = sum(
                float(blocks[b].d @ block_solutions[b]) for b in costed
            )
            if v_costed > eta_val + 1e-9 * max(1.0, abs(v_costed)):
                row = dict(agg_lin)
                row[n_m] = 1.0
                cut_rows.append((row, agg_rhs))
                state.cuts.append(
                    BendersCut(
                        "optimality",
                        -1,
                        {int(mvars[i]): vv for i, vv in agg_lin.items()},
                        agg_rhs,
                    )
                )
                new_cuts += 1

        if all_feasible:
            ub_cand = float(lp.c[mvars] @ x_hat) + total_v
            if ub_cand < ub_best - 1e-12:
                ub_best = ub_cand
                full = np.zeros(lp.n_cols)
                full[mvars] = x_hat
                for b, blk in enumerate(blocks):
                    full[blk.bvars] = block_solutions[b]
                incumbent_x = full
            state.upper_bounds.append(ub_best)
            if (ub_best - lb) <= gap_tol * max(abs(ub_best), 1e-9) + 1e-12:
                final = result(MILP_OPTIMAL)
                return final, state
        else:
            state.upper_bounds.append(ub_best)
        if new_cuts == 0 and all_feasible:
            # Master optimal and no violated cuts: bounds have met.
            final = result(MILP_OPTIMAL)
            return final, state
    return (
        result(MILP_TIME_LIMIT if incumbent_x is not None else MILP_NO_INCUMBENT),
        state,
    )
