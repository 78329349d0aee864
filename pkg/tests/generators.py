"""Deterministic random-problem generators shared by unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from ecsplan.geometry import Point, knn_candidates
from ecsplan.model import (
    CandidateCable,
    ModelOptions,
    Node,
    PlanningInstance,
    make_instance,
)
from ecsplan.scenarios import EconomicParams, ReliabilityParams, WindScenario
from ecsplan.solver.lp import LinearProgram
from ecsplan.solver.milp import MilpProblem

_INF = float("inf")


def random_planning_instance(
    rng: np.random.Generator,
    n_wt: int = 5,
    k: int = 3,
    n_oss: int = 1,
    tight_capacity: bool = False,
    feeder_cap_chance: float = 0.3,
    max_cables: int | None = None,
    n_wind: int = 3,
    **options,
) -> PlanningInstance:
    """Small farm with nearest-neighbour candidates, sized for brute force.

    Capacities are drawn wide by default; ``tight_capacity`` pulls them
    close to the turbine ratings so that post-fault states actually have
    to drop turbines.  If the candidate graph leaves some turbine
    unreachable, k is raised until it connects (mirrors the remedy the
    planner suggests to users).  ``max_cables`` trims the candidate list
    back to the shortest edges while preserving a spanning forest, so
    the instance stays solvable.
    """
    while True:
        xs = rng.uniform(0.0, 4.0, n_wt)
        ys = rng.uniform(0.8, 3.6, n_wt)
        wt_pts = list(zip(xs, ys))
        if n_oss == 1:
            oss_pts = [(2.0 + rng.uniform(-0.5, 0.5), 0.0)]
        else:
            oss_pts = [
                (1.0 + rng.uniform(-0.3, 0.3), 0.0),
                (3.0 + rng.uniform(-0.3, 0.3), 0.0),
            ]
        pts = oss_pts + wt_pts
        # reject layouts with near-coincident nodes
        ok = True
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if np.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]) < 0.3:
                    ok = False
        if ok:
            break
    nodes = [Node(i, x, y, "OSS") for i, (x, y) in enumerate(oss_pts)]
    ratings = np.round(rng.uniform(4.0, 10.0, n_wt) * 2.0) / 2.0
    nodes += [
        Node(n_oss + i, x, y, "WT", float(ratings[i]))
        for i, (x, y) in enumerate(wt_pts)
    ]
    points = [Point(n.x, n.y) for n in nodes]
    oss_ids = set(range(n_oss))

    kk = k
    while True:
        pairs = sorted(
            p for p in knn_candidates(points, kk)
            if not (p[0] in oss_ids and p[1] in oss_ids)
        )
        # union-find connectivity of WTs to an OSS
        parent = list(range(len(nodes)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in pairs:
            parent[find(i)] = find(j)
        roots = {find(o) for o in oss_ids}
        if all(find(w) in roots for w in range(n_oss, len(nodes))):
            break
        kk += 1

    if max_cables is not None and len(pairs) > max_cables:
        dist = {
            (i, j): float(np.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]))
            for i, j in pairs
        }
        ranked = sorted(pairs, key=lambda p: (dist[p], p))
        parent = list(range(len(nodes)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        keep = set()
        for i, j in ranked:  # shortest spanning forest first
            if find(i) != find(j):
                parent[find(i)] = find(j)
                keep.add((i, j))
        for i, j in ranked:
            if len(keep) >= max_cables:
                break
            keep.add((i, j))
        pairs = sorted(keep)

    max_rating = float(ratings.max())
    mu = rng.uniform(30.0, 60.0)
    lam0 = rng.uniform(0.05, 0.15)
    cables = []
    for idx, (i, j) in enumerate(pairs):
        length = float(np.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]))
        cap_mult = rng.uniform(1.2, 2.2) if tight_capacity else rng.uniform(3.0, 5.0)
        cables.append(
            CandidateCable(
                index=idx,
                i=i,
                j=j,
                length=length,
                capacity=float(cap_mult * max_rating),
                susceptance=float(rng.uniform(40.0, 120.0)),
                reliability=ReliabilityParams(
                    failure_rate=lam0 * length,
                    repair_rate=mu,
                    tau_sw=float(rng.uniform(4.0, 12.0)),
                    tau_rp=float(rng.uniform(48.0, 240.0)),
                ),
            )
        )
    econ = EconomicParams(
        cable_cost_per_km=float(rng.uniform(200.0, 400.0)),
        electricity_price=float(rng.uniform(0.03, 0.08)),
        om_fraction=0.002,
        discount_rate=0.05,
        lifetime_years=25.0,
    )
    if n_wind == 2:
        wind = (
            WindScenario(0.6, 1.0),
            WindScenario(0.4, float(rng.uniform(0.4, 0.8))),
        )
    else:
        wind = (
            WindScenario(0.55, 1.0),
            WindScenario(0.35, float(rng.uniform(0.4, 0.8))),
            WindScenario(0.10, 0.0),
        )
    feeder_capacity = None
    if rng.random() < feeder_cap_chance:
        feeder_capacity = float(rng.uniform(1.6, 3.0) * max_rating)
    return make_instance(
        nodes,
        cables,
        wind,
        econ,
        ModelOptions(feeder_capacity=feeder_capacity, **options),
    )


def random_lp(
    rng: np.random.Generator,
    m: int = 20,
    n: int = 30,
    density: float = 0.35,
    scale: float = 1.0,
) -> LinearProgram:
    """Feasible bounded LP built around a random interior anchor point."""
    a = rng.uniform(-4.0, 4.0, size=(m, n)) * scale
    a[rng.random((m, n)) > density] = 0.0
    # Guarantee no empty rows so every row constrains something.
    for r in range(m):
        if not a[r].any():
            a[r, int(rng.integers(n))] = rng.uniform(0.5, 2.0) * scale
    x0 = rng.uniform(-3.0, 3.0, n)
    lb = x0 - rng.uniform(0.5, 4.0, n)
    ub = x0 + rng.uniform(0.5, 4.0, n)
    b0 = a @ x0
    row_lo = np.full(m, -_INF)
    row_hi = np.full(m, _INF)
    for r in range(m):
        kind = rng.random()
        if kind < 0.15:
            row_lo[r] = row_hi[r] = b0[r]
        elif kind < 0.45:
            row_lo[r] = b0[r] - rng.uniform(0.1, 3.0) * scale
        elif kind < 0.75:
            row_hi[r] = b0[r] + rng.uniform(0.1, 3.0) * scale
        else:
            row_lo[r] = b0[r] - rng.uniform(0.1, 3.0) * scale
            row_hi[r] = b0[r] + rng.uniform(0.1, 3.0) * scale
    c = rng.uniform(-2.0, 2.0, n)
    c[rng.random(n) < 0.2] = 0.0
    rows, cols = np.nonzero(a)
    return LinearProgram(
        c=c,
        n_rows=m,
        a_rows=rows,
        a_cols=cols,
        a_vals=a[rows, cols],
        row_lower=row_lo,
        row_upper=row_hi,
        var_lower=lb,
        var_upper=ub,
    )


def random_infeasible_lp(rng: np.random.Generator, m: int = 12, n: int = 18):
    """Feasible base LP plus a directly contradicting pair of rows."""
    lp = random_lp(rng, m, n)
    g = rng.uniform(-2.0, 2.0, n)
    g[rng.random(n) > 0.5] = 0.0
    if not g.any():
        g[0] = 1.0
    q = rng.uniform(-2.0, 2.0)
    extra_rows = np.concatenate([lp.a_rows, np.full(np.count_nonzero(g), m),
                                 np.full(np.count_nonzero(g), m + 1)])
    nz = np.nonzero(g)[0]
    extra_cols = np.concatenate([lp.a_cols, nz, nz])
    extra_vals = np.concatenate([lp.a_vals, g[nz], g[nz]])
    return LinearProgram(
        c=lp.c,
        n_rows=m + 2,
        a_rows=extra_rows,
        a_cols=extra_cols,
        a_vals=extra_vals,
        row_lower=np.concatenate([lp.row_lower, [q + 1.0, -_INF]]),
        row_upper=np.concatenate([lp.row_upper, [_INF, q - 1.0]]),
        var_lower=lp.var_lower,
        var_upper=lp.var_upper,
    )


def random_unbounded_lp(rng: np.random.Generator, m: int = 10, n: int = 15):
    """Base LP with an added improving ray through one new coupling row."""
    lp = random_lp(rng, m, n)
    # Two new variables tied by y1 - y2 = 0; moving along (1, 1) costs -0.5.
    rows = np.concatenate([lp.a_rows, [m, m]])
    cols = np.concatenate([lp.a_cols, [n, n + 1]])
    vals = np.concatenate([lp.a_vals, [1.0, -1.0]])
    return LinearProgram(
        c=np.concatenate([lp.c, [-1.0, 0.5]]),
        n_rows=m + 1,
        a_rows=rows,
        a_cols=cols,
        a_vals=vals,
        row_lower=np.concatenate([lp.row_lower, [0.0]]),
        row_upper=np.concatenate([lp.row_upper, [0.0]]),
        var_lower=np.concatenate([lp.var_lower, [0.0, 0.0]]),
        var_upper=np.concatenate([lp.var_upper, [_INF, _INF]]),
    )


def random_binary_milp(
    rng: np.random.Generator, n: int = 12, m: int = 8
) -> MilpProblem:
    """All-binary MILP with rows wide enough to admit many assignments."""
    a = rng.uniform(-3.0, 3.0, size=(m, n))
    a[rng.random((m, n)) > 0.5] = 0.0
    for r in range(m):
        if not a[r].any():
            a[r, int(rng.integers(n))] = 1.0
    x0 = (rng.random(n) < 0.5).astype(float)
    b0 = a @ x0
    row_lo = np.full(m, -_INF)
    row_hi = np.full(m, _INF)
    for r in range(m):
        kind = rng.random()
        if kind < 0.4:
            row_lo[r] = b0[r] - rng.uniform(0.2, 2.5)
        elif kind < 0.8:
            row_hi[r] = b0[r] + rng.uniform(0.2, 2.5)
        else:
            row_lo[r] = b0[r] - rng.uniform(0.2, 2.5)
            row_hi[r] = b0[r] + rng.uniform(0.2, 2.5)
    c = rng.uniform(-3.0, 3.0, n)
    rows, cols = np.nonzero(a)
    lp = LinearProgram(
        c=c,
        n_rows=m,
        a_rows=rows,
        a_cols=cols,
        a_vals=a[rows, cols],
        row_lower=row_lo,
        row_upper=row_hi,
        var_lower=np.zeros(n),
        var_upper=np.ones(n),
    )
    return MilpProblem(lp=lp, binary=np.arange(n))
