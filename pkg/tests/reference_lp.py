"""Independent dense-tableau simplex used as an oracle for the production LP solver.

Deliberately textbook and slow: convert to standard form (equalities,
nonnegative variables), run a two-phase full-tableau simplex with Bland's
rule throughout.  Shares no code with the revised simplex under test.
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-9


def _tableau_simplex(t: np.ndarray, basis: list[int], cost: np.ndarray) -> str:
    """Minimize cost over the tableau in place; Bland's rule, returns status."""
    n = t.shape[1] - 1
    while True:
        cb = cost[basis]
        d = cost - cb @ t[:, :n]
        enter = -1
        for j in range(n):
            if d[j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best = np.inf
        for i in range(t.shape[0]):
            if t[i, enter] > _TOL:
                ratio = t[i, n] / t[i, enter]
                if ratio < best - _TOL or (
                    ratio < best + _TOL and (leave < 0 or basis[i] < basis[leave])
                ):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        piv = t[leave, enter]
        t[leave] /= piv
        for i in range(t.shape[0]):
            if i != leave:
                t[i] -= t[i, enter] * t[leave]
        basis[leave] = enter


def solve_reference(lp) -> tuple[str, float | None, np.ndarray | None]:
    """Solve a LinearProgram; returns (status, objective, x)."""
    m, n = lp.n_rows, lp.n_cols
    a = np.zeros((m, n))
    a[lp.a_rows, lp.a_cols] += lp.a_vals

    # Standard-form variables: x_j = off_j + sum(mult * z).
    offsets = np.zeros(n)
    col_of: list[list[tuple[int, float]]] = []
    n_z = 0
    extra_ub_rows: list[tuple[int, float]] = []  # (z index, upper value)
    for j in range(n):
        lo, hi = lp.var_lower[j], lp.var_upper[j]
        if np.isfinite(lo):
            offsets[j] = lo
            col_of.append([(n_z, 1.0)])
            if np.isfinite(hi):
                extra_ub_rows.append((n_z, hi - lo))
            n_z += 1
        elif np.isfinite(hi):
            offsets[j] = hi
            col_of.append([(n_z, -1.0)])
            n_z += 1
        else:
            col_of.append([(n_z, 1.0), (n_z + 1, -1.0)])
            n_z += 2

    # Collect equality rows over z: each original row yields <=, >= or =.
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    kinds: list[str] = []  # le, ge, eq

    def z_row(r: int) -> np.ndarray:
        out = np.zeros(n_z)
        for j in range(n):
            if a[r, j] != 0.0:
                for zi, mult in col_of[j]:
                    out[zi] += a[r, j] * mult
        return out

    for r in range(m):
        base = float(a[r] @ offsets)
        zr = z_row(r)
        lo, hi = lp.row_lower[r], lp.row_upper[r]
        if np.isfinite(lo) and np.isfinite(hi) and lo == hi:
            rows.append(zr)
            rhs.append(lo - base)
            kinds.append("eq")
            continue
        if np.isfinite(lo):
            rows.append(zr.copy())
            rhs.append(lo - base)
            kinds.append("ge")
        if np.isfinite(hi):
            rows.append(zr.copy())
            rhs.append(hi - base)
            kinds.append("le")
    for zi, ub in extra_ub_rows:
        zr = np.zeros(n_z)
        zr[zi] = 1.0
        rows.append(zr)
        rhs.append(ub)
        kinds.append("le")

    n_rows = len(rows)
    n_slack = sum(1 for k in kinds if k != "eq")
    width = n_z + n_slack + n_rows  # + one artificial per row
    t = np.zeros((n_rows, width + 1))
    s_at = n_z
    for i, (zr, b, kind) in enumerate(zip(rows, rhs, kinds)):
        t[i, :n_z] = zr
        if kind == "le":
            t[i, s_at] = 1.0
            s_at += 1
        elif kind == "ge":
            t[i, s_at] = -1.0
            s_at += 1
        t[i, width] = b
        if b < 0:
            t[i] = -t[i]
        t[i, n_z + n_slack + i] = 1.0  # artificial, after sign fix
    basis = [n_z + n_slack + i for i in range(n_rows)]

    cost1 = np.zeros(width)
    cost1[n_z + n_slack :] = 1.0
    st = _tableau_simplex(t, basis, cost1)
    assert st == "optimal"  # phase 1 is always bounded below by 0
    phase1_obj = float(cost1[basis] @ t[:, width])
    if phase1_obj > 1e-7:
        return "infeasible", None, None

    # Pivot leftover artificials out of the basis where possible; rows where
    # that fails are redundant (all real coefficients zero) and are dropped.
    for i in range(n_rows):
        if basis[i] >= n_z + n_slack:
            for j in range(n_z + n_slack):
                if abs(t[i, j]) > _TOL:
                    piv = t[i, j]
                    t[i] /= piv
                    for ii in range(n_rows):
                        if ii != i:
                            t[ii] -= t[ii, j] * t[i]
                    basis[i] = j
                    break
    keep = [i for i in range(n_rows) if basis[i] < n_z + n_slack]
    n_real = n_z + n_slack
    t = np.hstack([t[keep][:, :n_real], t[keep][:, width:]])
    basis = [basis[i] for i in keep]

    cost2 = np.zeros(n_real)
    for j in range(n):
        for zi, mult in col_of[j]:
            cost2[zi] += lp.c[j] * mult
    st = _tableau_simplex(t, basis, cost2)
    if st == "unbounded":
        return "unbounded", None, None
    z = np.zeros(n_real)
    for i, bj in enumerate(basis):
        z[bj] = t[i, n_real]
    x = offsets.copy()
    for j in range(n):
        for zi, mult in col_of[j]:
            x[j] += mult * z[zi]
    return "optimal", float(lp.c @ x), x
