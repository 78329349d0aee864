"""Bounded-variable revised simplex with sparse LU factorization.

Solves  min c'x  subject to  rl <= Ax <= ru  and  vl <= x <= vu, with
two-sided rows and variable bounds handled natively (no standard-form
blowup).  Rows are realized through slack variables, W = [A | -I] with
W u = 0, and a product-form-of-the-inverse update is layered over a
sparse LU of the basis, refactorized periodically.  Phase 1 minimizes
the total bound violation of the basic variables (composite objective)
starting from the all-slack basis or a supplied warm basis.

Conventions:

- Row duals measure the change of the optimal objective per unit upward
  shift of the binding row bound: a positive dual binds at the row lower
  bound, a negative one at the upper bound (minimization).
- The infeasibility certificate ``farkas`` is a row-weight vector y with

      sum_{y_r>0} y_r*rl_r + sum_{y_r<0} y_r*ru_r
          >  max over the variable box of (y'A) x,

  which no feasible point can satisfy.  The inequality is verified
  numerically before the certificate is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .settings import DEFAULT_SETTINGS, SolverSettings

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
BREAKDOWN = "breakdown"

# nonbasic / basic status codes
_BASIC = 0
_AT_LOWER = 1
_AT_UPPER = 2
_FREE = 3

_INF = float("inf")


class SolverError(RuntimeError):
    """Numerical breakdown, reported distinctly from infeasibility."""


@dataclass
class LinearProgram:
    """Sparse-triplet LP with two-sided rows and variable bounds."""

    c: np.ndarray
    n_rows: int
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    row_lower: np.ndarray
    row_upper: np.ndarray
    var_lower: np.ndarray
    var_upper: np.ndarray
    var_names: list[str] | None = None
    row_names: list[str] | None = None

    @property
    def n_cols(self) -> int:
        return len(self.c)

    def validate(self) -> None:
        n, m = self.n_cols, self.n_rows
        if not (len(self.var_lower) == len(self.var_upper) == n):
            raise ValueError("variable bound arrays must match objective length")
        if not (len(self.row_lower) == len(self.row_upper) == m):
            raise ValueError("row bound arrays must match row count")
        if not np.all(np.isfinite(self.a_vals)):
            raise ValueError("constraint coefficients must be finite")
        if not np.all(np.isfinite(self.c)):
            raise ValueError("objective coefficients must be finite")
        if len(self.a_rows) and (self.a_rows.max() >= m or self.a_rows.min() < 0):
            raise ValueError("row index out of range")
        if len(self.a_cols) and (self.a_cols.max() >= n or self.a_cols.min() < 0):
            raise ValueError("column index out of range")
        if np.any(self.var_lower > self.var_upper):
            raise ValueError("variable lower bound exceeds upper bound")
        if np.any(self.row_lower > self.row_upper):
            raise ValueError("row lower bound exceeds upper bound")

    def matrix(self) -> sp.csc_matrix:
        return sp.csc_matrix(
            (self.a_vals, (self.a_rows, self.a_cols)),
            shape=(self.n_rows, self.n_cols),
        )


class LpBuilder:
    """Incremental construction of a LinearProgram."""

    def __init__(self) -> None:
        self._obj: list[float] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._var_names: list[str] = []
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._row_lo: list[float] = []
        self._row_hi: list[float] = []
        self._row_names: list[str] = []

    @property
    def num_vars(self) -> int:
        return len(self._obj)

    @property
    def num_rows(self) -> int:
        return len(self._row_lo)

    def add_var(
        self, lb: float, ub: float, obj: float = 0.0, name: str | None = None
    ) -> int:
        idx = len(self._obj)
        self._obj.append(obj)
        self._lb.append(lb)
        self._ub.append(ub)
        self._var_names.append(name if name is not None else f"x{idx}")
        return idx

    def add_row(
        self,
        coeffs: dict[int, float],
        lo: float,
        hi: float,
        name: str | None = None,
    ) -> int:
        idx = len(self._row_lo)
        for j, v in coeffs.items():
            if v != 0.0:
                self._rows.append(idx)
                self._cols.append(j)
                self._vals.append(v)
        self._row_lo.append(lo)
        self._row_hi.append(hi)
        self._row_names.append(name if name is not None else f"r{idx}")
        return idx

    def set_objective(self, j: int, coeff: float) -> None:
        self._obj[j] = coeff

    def build(self) -> LinearProgram:
        lp = LinearProgram(
            c=np.asarray(self._obj, dtype=float),
            n_rows=len(self._row_lo),
            a_rows=np.asarray(self._rows, dtype=np.int64),
            a_cols=np.asarray(self._cols, dtype=np.int64),
            a_vals=np.asarray(self._vals, dtype=float),
            row_lower=np.asarray(self._row_lo, dtype=float),
            row_upper=np.asarray(self._row_hi, dtype=float),
            var_lower=np.asarray(self._lb, dtype=float),
            var_upper=np.asarray(self._ub, dtype=float),
            var_names=list(self._var_names),
            row_names=list(self._row_names),
        )
        lp.validate()
        return lp


@dataclass
class LpResult:
    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0
    basis: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)


def _pow2_scale(v: float) -> float:
    """Nearest power of two bringing |v| toward 1 (exact in binary floats)."""
    if v <= 0.0 or not math.isfinite(v):
        return 1.0
    return float(2.0 ** math.frexp(v)[1])


class _Simplex:
    def __init__(self, lp: LinearProgram, settings: SolverSettings):
        self.s = settings
        self.m = lp.n_rows
        self.n = lp.n_cols
        a = lp.matrix()

        # Row equilibration and objective scaling with exact powers of two.
        row_max = np.zeros(self.m)
        if a.nnz:
            row_max = np.asarray(abs(a).max(axis=1).todense()).ravel()
        self.row_scale = np.array([1.0 / _pow2_scale(v) for v in row_max])
        r = sp.diags(self.row_scale)
        self.a = (r @ a).tocsc()
        self.at = self.a.T.tocsc()
        self.obj_scale = _pow2_scale(float(np.max(np.abs(lp.c))) if self.n else 1.0)

        nm = self.n + self.m
        self.lb = np.concatenate([lp.var_lower, lp.row_lower * self.row_scale])
        self.ub = np.concatenate([lp.var_upper, lp.row_upper * self.row_scale])
        self.cost = np.concatenate([lp.c / self.obj_scale, np.zeros(self.m)])
        self.stat = np.empty(nm, dtype=np.int8)
        self.xval = np.zeros(nm)
        self.basic = np.arange(self.n, self.n + self.m, dtype=np.int64)
        self.in_basis_pos = np.full(nm, -1, dtype=np.int64)
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self.iterations = 0
        self.stalls = 0
        self.bland = False

    # ----- basis linear algebra -------------------------------------------

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j < self.n:
            sl = slice(self.a.indptr[j], self.a.indptr[j + 1])
            col[self.a.indices[sl]] = self.a.data[sl]
        else:
            col[j - self.n] = -1.0
        return col

    def factorize(self) -> None:
        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []
        for pos, j in enumerate(self.basic):
            if j < self.n:
                sl = slice(self.a.indptr[j], self.a.indptr[j + 1])
                idx = self.a.indices[sl]
                rows.append(idx)
                cols.append(np.full(len(idx), pos, dtype=np.int64))
                vals.append(self.a.data[sl])
            else:
                rows.append(np.array([j - self.n], dtype=np.int64))
                cols.append(np.array([pos], dtype=np.int64))
                vals.append(np.array([-1.0]))
        b = sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols)))
            if rows
            else ((), ((), ())),
            shape=(self.m, self.m),
        )
        try:
            self.lu = splu(b)
        except RuntimeError as exc:
            raise _SingularBasis(str(exc)) from exc
        self.etas = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        w = self.lu.solve(v)
        for pos, eta in self.etas:
            piv = w[pos] / eta[pos]
            if piv != 0.0:
                w -= eta * piv
            w[pos] = piv
        return w

    def btran(self, v: np.ndarray) -> np.ndarray:
        w = v.copy()
        for pos, eta in reversed(self.etas):
            w[pos] = (w[pos] - (eta @ w - eta[pos] * w[pos])) / eta[pos]
        return self.lu.solve(w, trans="T")

    def recompute_basics(self) -> None:
        self.xval[self.basic] = 0.0
        rhs = -(self.a @ self.xval[: self.n]) + self.xval[self.n :]
        self.xval[self.basic] = self.ftran(rhs)
        self.in_basis_pos[:] = -1
        self.in_basis_pos[self.basic] = np.arange(self.m)

    # ----- initialization --------------------------------------------------

    def init_cold(self) -> None:
        for j in range(self.n + self.m):
            if self.lb[j] > -_INF:
                self.stat[j] = _AT_LOWER
                self.xval[j] = self.lb[j]
            elif self.ub[j] < _INF:
                self.stat[j] = _AT_UPPER
                self.xval[j] = self.ub[j]
            else:
                self.stat[j] = _FREE
                self.xval[j] = 0.0
        self.basic = np.arange(self.n, self.n + self.m, dtype=np.int64)
        self.stat[self.basic] = _BASIC
        self.factorize()
        self.recompute_basics()

    def init_warm(self, basis: tuple[np.ndarray, np.ndarray]) -> bool:
        basic, stat = basis
        if len(basic) != self.m or len(stat) != self.n + self.m:
            return False
        self.basic = np.asarray(basic, dtype=np.int64).copy()
        self.stat = np.asarray(stat, dtype=np.int8).copy()
        if sorted(self.basic.tolist()) != sorted(
            np.flatnonzero(self.stat == _BASIC).tolist()
        ):
            return False
        # Nonbasic values snap to their recorded bound (or 0 when free).
        for j in range(self.n + self.m):
            st = self.stat[j]
            if st == _AT_LOWER:
                if self.lb[j] <= -_INF:
                    return False
                self.xval[j] = self.lb[j]
            elif st == _AT_UPPER:
                if self.ub[j] >= _INF:
                    return False
                self.xval[j] = self.ub[j]
            elif st == _FREE:
                self.xval[j] = 0.0
        try:
            self.factorize()
        except _SingularBasis:
            return False
        self.recompute_basics()
        return True

    # ----- iteration pieces -------------------------------------------------

    def infeasibility(self) -> tuple[float, np.ndarray]:
        xb = self.xval[self.basic]
        low = np.maximum(self.lb[self.basic] - xb, 0.0)
        up = np.maximum(xb - self.ub[self.basic], 0.0)
        low[~np.isfinite(low)] = 0.0
        up[~np.isfinite(up)] = 0.0
        grad = np.where(low > self.s.feas_tol, -1.0, 0.0) + np.where(
            up > self.s.feas_tol, 1.0, 0.0
        )
        return float(low.sum() + up.sum()), grad

    def price(self, cb: np.ndarray, phase1: bool) -> tuple[np.ndarray, np.ndarray]:
        """Return (y, reduced costs over all n+m columns).

        In phase 1 the nonbasic cost is identically zero (the composite
        objective charges only violated basics), so d = -W'y there.
        """
        y = self.btran(cb)
        d = np.empty(self.n + self.m)
        if phase1:
            d[: self.n] = -(self.at @ y)
        else:
            d[: self.n] = self.cost[: self.n] - (self.at @ y)
        d[self.n :] = y
        return y, d

    def entering(self, d: np.ndarray) -> int:
        room = self.ub - self.lb
        cand_low = (self.stat == _AT_LOWER) & (d < -self.s.opt_tol) & (room > 0)
        cand_up = (self.stat == _AT_UPPER) & (d > self.s.opt_tol) & (room > 0)
        cand_free = (self.stat == _FREE) & (np.abs(d) > self.s.opt_tol)
        cand = cand_low | cand_up | cand_free
        idx = np.flatnonzero(cand)
        if len(idx) == 0:
            return -1
        if self.bland:
            return int(idx[0])
        return int(idx[np.argmax(np.abs(d[idx]))])

    def ratio_test(
        self, q: int, sigma: float, w: np.ndarray, phase1: bool
    ) -> tuple[float, int]:
        """Smallest blocking step; returns (t, blocker).

        blocker is the basis position of the leaving variable, or -1 for a
        bound flip of the entering variable, or -2 when unbounded.  In
        phase 1, basics outside their bounds block where they regain the
        violated bound; feasible basics block at whichever bound they
        approach, as in phase 2.
        """
        tol = self.s.pivot_tol
        idx = np.flatnonzero(np.abs(w) > tol)
        t_arr = np.full(len(idx), _INF)
        if len(idx):
            r = -sigma * w[idx]  # d x_B / d t at these positions
            bi = self.basic[idx]
            x = self.xval[bi]
            lo = self.lb[bi]
            hi = self.ub[bi]
            if phase1:
                below = x < lo - self.s.feas_tol
                above = x > hi + self.s.feas_tol
                mid = ~(below | above)
            else:
                below = np.zeros(len(idx), dtype=bool)
                above = below
                mid = ~below
            mask = below & (r > tol)
            t_arr[mask] = (lo[mask] - x[mask]) / r[mask]
            mask = above & (r < -tol)
            t_arr[mask] = (hi[mask] - x[mask]) / r[mask]
            mask = mid & (r > tol) & np.isfinite(hi)
            t_arr[mask] = (hi[mask] - x[mask]) / r[mask]
            mask = mid & (r < -tol) & np.isfinite(lo)
            t_arr[mask] = (lo[mask] - x[mask]) / r[mask]
            t_arr = np.maximum(t_arr, 0.0)
        t_min = float(t_arr.min()) if len(idx) else _INF
        flip = self.ub[q] - self.lb[q]
        if np.isfinite(flip) and flip < t_min - 1e-12:
            return float(flip), -1
        if t_min == _INF:
            return _INF, -2
        near = np.flatnonzero(t_arr <= t_min + 1e-12)
        if self.bland:
            pick = near[np.argmin(self.basic[idx[near]])]
        else:
            pick = near[np.argmax(np.abs(w[idx[near]]))]
        return t_min, int(idx[pick])

    def pivot(self, q: int, sigma: float, w: np.ndarray, t: float, pos: int) -> None:
        self.xval[self.basic] -= sigma * t * w
        self.xval[q] += sigma * t
        leaving = int(self.basic[pos])
        lo, hi = self.lb[leaving], self.ub[leaving]
        # Snap the leaving variable to whichever bound it reached.
        if not np.isfinite(lo):
            self.stat[leaving] = _AT_UPPER
            self.xval[leaving] = hi
        elif not np.isfinite(hi):
            self.stat[leaving] = _AT_LOWER
            self.xval[leaving] = lo
        elif abs(self.xval[leaving] - lo) <= abs(self.xval[leaving] - hi):
            self.stat[leaving] = _AT_LOWER
            self.xval[leaving] = lo
        else:
            self.stat[leaving] = _AT_UPPER
            self.xval[leaving] = hi
        self.basic[pos] = q
        self.stat[q] = _BASIC
        self.in_basis_pos[leaving] = -1
        self.in_basis_pos[q] = pos
        self.etas.append((pos, w.copy()))
        if len(self.etas) >= self.s.refactor_every:
            self.factorize()
            self.recompute_basics()

    def run_phase(self, phase1: bool) -> str:
        """Iterate until optimal/infeasible/unbounded for the active phase."""
        while True:
            if self.iterations >= self.s.max_lp_iters:
                return ITERATION_LIMIT
            if phase1:
                total, grad = self.infeasibility()
                if total <= self.s.feas_tol * (1.0 + self.m):
                    return "feasible"
                cb = grad
            else:
                cb = self.cost[self.basic]
            y, d = self.price(cb, phase1)
            d[self.basic] = 0.0
            q = self.entering(d)
            if q < 0:
                if phase1:
                    return INFEASIBLE
                return OPTIMAL
            if self.stat[q] == _AT_UPPER or (self.stat[q] == _FREE and d[q] > 0):
                sigma = -1.0
            else:
                sigma = 1.0
            w = self.ftran(self._column(q))
            t, pos = self.ratio_test(q, sigma, w, phase1)
            self.iterations += 1
            if pos == -2:
                if phase1:
                    return BREAKDOWN
                return UNBOUNDED
            if t <= 1e-12:
                self.stalls += 1
                if self.stalls > self.s.bland_after:
                    self.bland = True
            else:
                self.stalls = 0
                self.bland = False
            if pos == -1:
                # Bound flip: entering variable jumps to its other bound.
                self.xval[self.basic] -= sigma * t * w
                self.xval[q] += sigma * t
                self.stat[q] = _AT_UPPER if sigma > 0 else _AT_LOWER
                continue
            piv = abs(w[pos])
            if piv < self.s.pivot_tol:
                self.factorize()
                self.recompute_basics()
                w = self.ftran(self._column(q))
                t, pos = self.ratio_test(q, sigma, w, phase1)
                if pos < 0 or abs(w[pos]) < self.s.pivot_tol:
                    return BREAKDOWN
            self.pivot(q, sigma, w, t, pos)


class _SingularBasis(Exception):
    pass


def _verify_farkas(
    lp: LinearProgram, y: np.ndarray
) -> np.ndarray | None:
    """Normalize/check a Farkas row certificate; None when invalid."""
    a = lp.matrix()
    for cand in (y, -y):
        g = a.T @ cand
        lo_val = 0.0
        ok = True
        for r in range(lp.n_rows):
            v = cand[r]
            if v > 1e-12:
                if not np.isfinite(lp.row_lower[r]):
                    ok = False
                    break
                lo_val += v * lp.row_lower[r]
            elif v < -1e-12:
                if not np.isfinite(lp.row_upper[r]):
                    ok = False
                    break
                lo_val += v * lp.row_upper[r]
        if not ok:
            continue
        box_max = 0.0
        for j in np.flatnonzero(np.abs(g) > 1e-12):
            if g[j] > 0:
                if not np.isfinite(lp.var_upper[j]):
                    ok = False
                    break
                box_max += g[j] * lp.var_upper[j]
            else:
                if not np.isfinite(lp.var_lower[j]):
                    ok = False
                    break
                box_max += g[j] * lp.var_lower[j]
        if not ok:
            continue
        if lo_val - box_max > 1e-9 * (1.0 + abs(lo_val) + abs(box_max)):
            return cand
    return None


def _trivial_box_solve(lp: LinearProgram) -> LpResult:
    """LP with no rows: each variable sits at its cheapest finite bound."""
    x = np.zeros(lp.n_cols)
    for j in range(lp.n_cols):
        cj = lp.c[j]
        if cj > 0:
            if not np.isfinite(lp.var_lower[j]):
                return LpResult(status=UNBOUNDED)
            x[j] = lp.var_lower[j]
        elif cj < 0:
            if not np.isfinite(lp.var_upper[j]):
                return LpResult(status=UNBOUNDED)
            x[j] = lp.var_upper[j]
        else:
            if np.isfinite(lp.var_lower[j]):
                x[j] = lp.var_lower[j]
            elif np.isfinite(lp.var_upper[j]):
                x[j] = lp.var_upper[j]
    if np.any(lp.var_lower > lp.var_upper):
        return LpResult(status=INFEASIBLE)
    return LpResult(
        status=OPTIMAL,
        objective=float(lp.c @ x),
        x=x,
        duals=np.zeros(0),
        reduced_costs=lp.c.copy(),
    )


def solve_lp(
    lp: LinearProgram,
    settings: SolverSettings = DEFAULT_SETTINGS,
    warm_basis: tuple[np.ndarray, np.ndarray] | None = None,
) -> LpResult:
    """Solve the LP; see module docstring for dual/certificate conventions."""
    lp.validate()
    if np.any(lp.var_lower > lp.var_upper) or np.any(lp.row_lower > lp.row_upper):
        return LpResult(status=INFEASIBLE)
    if lp.n_rows == 0:
        return _trivial_box_solve(lp)

    sx = _Simplex(lp, settings)
    started = False
    if warm_basis is not None:
        try:
            started = sx.init_warm(warm_basis)
        except _SingularBasis:
            started = False
    if not started:
        try:
            sx.init_cold()
        except _SingularBasis as exc:
            raise SolverError(f"initial basis factorization failed: {exc}") from exc

    try:
        st = sx.run_phase(phase1=True)
        if st == "feasible":
            sx.factorize()
            sx.recompute_basics()
            st = sx.run_phase(phase1=False)
    except _SingularBasis as exc:
        raise SolverError(f"basis factorization failed: {exc}") from exc

    if st == INFEASIBLE:
        y = sx.btran(sx.infeasibility()[1])
        farkas = _verify_farkas(lp, y * sx.row_scale)
        return LpResult(status=INFEASIBLE, farkas=farkas, iterations=sx.iterations)
    if st == UNBOUNDED:
        return LpResult(status=UNBOUNDED, iterations=sx.iterations)
    if st in (ITERATION_LIMIT, BREAKDOWN):
        return LpResult(status=st, iterations=sx.iterations)

    # Fresh factorization before extracting the final numbers.
    sx.factorize()
    sx.recompute_basics()
    y, d = sx.price(sx.cost[sx.basic], phase1=False)
    x = sx.xval[: sx.n].copy()
    duals = y * sx.row_scale * sx.obj_scale
    reduced = d[: sx.n] * sx.obj_scale
    return LpResult(
        status=OPTIMAL,
        objective=float(lp.c @ x),
        x=x,
        duals=duals,
        reduced_costs=reduced,
        iterations=sx.iterations,
        basis=(sx.basic.copy(), sx.stat.copy()),
    )
