"""Branch-and-bound MILP over the bounded-variable simplex.

Minimization with binary integer variables only (the planning models never
need general integers).  Node selection plunges depth-first until a first
incumbent exists, then switches to best-bound; branching picks the most
fractional binary within the highest priority class, ties broken toward
the lowest variable index.  A deterministic rounding dive at the root
provides an early incumbent when it succeeds.  LP relaxations warm-start
from the parent basis.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpResult,
    SolverError,
    solve_lp,
)
from .settings import DEFAULT_SETTINGS, SolverSettings

MILP_OPTIMAL = "optimal"
MILP_INFEASIBLE = "infeasible"
MILP_UNBOUNDED = "unbounded"
MILP_TIME_LIMIT = "time_limit"
MILP_NO_INCUMBENT = "no_incumbent"

_INF = float("inf")


@dataclass
class Decomposition:
    """Block separability of a MILP: conditioning on the coupling
    variables splits the rest into independent blocks.

    ``blocks`` lists the variable columns owned by each block; every
    column outside all blocks is coupling.  Rows are classified by the
    block columns they touch; a row touching two blocks disables the
    whole feature and the problem is solved classically.  ``trigger``
    names the coupling binaries that drive branching; the remaining
    coupling variables must be deducible from an integral trigger
    assignment by ``completer``, which maps a relaxation vector to
    values for every coupling column, or None for assignments it does
    not understand.  A None (or missing) completer only costs speed,
    never correctness: the search falls back to plain branch and bound
    below such nodes, and every completion is verified against the
    coupling rows before use.

    ``rounder`` optionally turns a fractional relaxation vector into a
    promising integral trigger assignment, returned as a full copy of
    the vector with the trigger entries overwritten.  Its completions
    only ever tighten the incumbent, so it may ignore branching fixes
    and fail freely.
    """

    blocks: list[np.ndarray]
    trigger: np.ndarray
    completer: Callable[[np.ndarray], dict[int, float] | None] | None = None
    rounder: Callable[[np.ndarray], np.ndarray | None] | None = None


@dataclass
class MilpProblem:
    """An LP plus the indices of its binary variables.

    ``priority`` (optional, aligned with ``binary``) steers branching:
    among fractional binaries only the highest present priority class is
    considered.  Useful when some binaries are structural decisions and
    the rest follow from them.
    """

    lp: LinearProgram
    binary: np.ndarray
    var_names: list[str] | None = None
    priority: np.ndarray | None = None
    decomposition: Decomposition | None = None

    def validate(self) -> None:
        self.lp.validate()
        b = np.asarray(self.binary)
        if len(b) and (b.min() < 0 or b.max() >= self.lp.n_cols):
            raise ValueError("binary index out of range")
        if np.any(self.lp.var_lower[b] < -1e-12) or np.any(
            self.lp.var_upper[b] > 1.0 + 1e-12
        ):
            raise ValueError("binary variables must have bounds within [0, 1]")
        if self.priority is not None and len(self.priority) != len(b):
            raise ValueError("priority must align with the binary index list")


@dataclass
class MilpResult:
    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    bound: float = -_INF
    gap: float = _INF
    nodes: int = 0

    def certified(self, gap_tol: float) -> bool:
        return self.status == MILP_OPTIMAL and self.gap <= gap_tol + 1e-15


@dataclass
class _Node:
    bound: float
    seq: int
    fixes: dict[int, float] = field(default_factory=dict)
    basis: tuple[np.ndarray, np.ndarray] | None = None
    res: LpResult | None = None  # pre-solved relaxation (root only)

    def __lt__(self, other: "_Node") -> bool:
        return (self.bound, self.seq) < (other.bound, other.seq)


def _with_fixes(lp: LinearProgram, fixes: dict[int, float]) -> LinearProgram:
    lo = lp.var_lower.copy()
    hi = lp.var_upper.copy()
    for j, v in fixes.items():
        lo[j] = v
        hi[j] = v
    return LinearProgram(
        c=lp.c,
        n_rows=lp.n_rows,
        a_rows=lp.a_rows,
        a_cols=lp.a_cols,
        a_vals=lp.a_vals,
        row_lower=lp.row_lower,
        row_upper=lp.row_upper,
        var_lower=lo,
        var_upper=hi,
        var_names=lp.var_names,
        row_names=lp.row_names,
    )


def _solve_node(
    lp: LinearProgram,
    fixes: dict[int, float],
    settings: SolverSettings,
    basis,
) -> LpResult:
    res = solve_lp(_with_fixes(lp, fixes), settings, warm_basis=basis)
    if res.status not in (OPTIMAL, INFEASIBLE, UNBOUNDED):
        # Retry cold before declaring a breakdown.
        res = solve_lp(_with_fixes(lp, fixes), settings)
        if res.status not in (OPTIMAL, INFEASIBLE, UNBOUNDED):
            raise SolverError(f"node relaxation failed with status {res.status}")
    return res


def _round_half_up(v: float) -> float:
    """Ties round to 1; banker's rounding would bias connectivity down."""
    return float(np.floor(v + 0.5))


def _most_fractional(
    x: np.ndarray,
    binary: np.ndarray,
    int_tol: float,
    priority: np.ndarray | None = None,
) -> int:
    frac = np.abs(x[binary] - np.round(x[binary]))
    loose = frac > int_tol
    if not np.any(loose):
        return -1
    if priority is not None:
        loose &= priority == priority[loose].max()
    pick = np.flatnonzero(loose)
    worst = int(pick[np.argmax(frac[pick])])
    return int(binary[worst])


def _dive(
    lp: LinearProgram,
    binary: np.ndarray,
    start: LpResult,
    settings: SolverSettings,
    deadline: float | None,
    priority: np.ndarray | None = None,
    fixes: dict[int, float] | None = None,
) -> tuple[float, np.ndarray] | None:
    """Deterministic rounding dive from an LP-feasible point.

    When priorities are given, the next variable to round is drawn from the
    highest priority class that still has loose variables, so structural
    decisions get settled before the variables that merely follow from them.
    """
    fixes = {} if fixes is None else dict(fixes)
    prio = {int(j): 0 for j in binary}
    if priority is not None:
        prio = {int(j): int(v) for j, v in zip(binary, priority)}
    res = start
    rounds = max(settings.dive_rounds, 2 * len(binary) + 50)
    for _ in range(rounds):
        if deadline is not None and time.monotonic() > deadline:
            return None
        x = res.x
        frac = np.abs(x[binary] - np.round(x[binary]))
        loose = [int(j) for j in binary if int(j) not in fixes]
        if not loose:
            break
        # Snap everything already integral, then round the most decided
        # variable of the highest loose priority class.
        snapped = False
        for j, f in zip(binary, frac):
            j = int(j)
            if j not in fixes and f <= settings.int_tol:
                fixes[j] = _round_half_up(x[j])
                snapped = True
        cand = None
        if not snapped:
            top = max(prio[j] for j in loose)
            cand = min(
                (j for j in loose if prio[j] == top),
                key=lambda j: (abs(x[j] - round(x[j])), j),
            )
            fixes[cand] = _round_half_up(x[cand])
        trial = solve_lp(_with_fixes(lp, fixes), settings, warm_basis=res.basis)
        if trial.status != OPTIMAL and cand is not None:
            # One-level repair: the preferred rounding broke feasibility,
            # so try the opposite value before giving up on the dive.
            fixes[cand] = 1.0 - fixes[cand]
            trial = solve_lp(_with_fixes(lp, fixes), settings, warm_basis=res.basis)
        if trial.status != OPTIMAL:
            return None
        res = trial
    x = res.x
    if np.all(np.abs(x[binary] - np.round(x[binary])) <= settings.int_tol):
        xi = x.copy()
        xi[binary] = np.round(xi[binary])
        return float(res.objective), xi
    return None


class _DecompRuntime:
    """Precomputed row/column slicing for a block-separable search.

    ``usable`` stays False when the declared structure does not hold
    (non-binary coupling variables or a row straddling two blocks), in
    which case the solver ignores the decomposition entirely.
    """

    def __init__(self, p: MilpProblem, settings: SolverSettings):
        self.settings = settings
        self.usable = False
        d = p.decomposition
        lp = p.lp
        owner = np.full(lp.n_cols, -1, dtype=np.int64)
        for b, cols in enumerate(d.blocks):
            owner[np.asarray(cols, dtype=np.int64)] = b
        coupling = np.flatnonzero(owner < 0)
        binset = {int(j) for j in p.binary}
        if any(int(j) not in binset for j in coupling):
            return
        entry_owner = owner[lp.a_cols]
        row_owner = np.full(lp.n_rows, -1, dtype=np.int64)
        for b in range(len(d.blocks)):
            touched = np.unique(lp.a_rows[entry_owner == b])
            if np.any(row_owner[touched] >= 0):
                return
            row_owner[touched] = b
        self.coupling = coupling
        cpos = np.full(lp.n_cols, -1, dtype=np.int64)
        cpos[coupling] = np.arange(len(coupling))
        prio = {int(j): 0 for j in p.binary}
        if p.priority is not None:
            prio = {int(j): int(v) for j, v in zip(p.binary, p.priority)}
        trig = sorted((int(j) for j in d.trigger), key=lambda j: (-prio[j], j))
        self.trigger = np.asarray(trig, dtype=np.int64)
        self.trigger_priority = np.asarray([prio[j] for j in trig], dtype=np.int64)
        self.completer = d.completer
        self.rounder = d.rounder
        self.c_coupling = lp.c[coupling]
        # rows over coupling variables only, checked numerically per completion
        crows = np.flatnonzero(row_owner < 0)
        rmap = np.full(lp.n_rows, -1, dtype=np.int64)
        rmap[crows] = np.arange(len(crows))
        csel = np.flatnonzero(np.isin(lp.a_rows, crows))
        self.check = (
            rmap[lp.a_rows[csel]],
            cpos[lp.a_cols[csel]],
            lp.a_vals[csel],
            lp.row_lower[crows],
            lp.row_upper[crows],
        )
        self.blocks = []
        for b in range(len(d.blocks)):
            cols = np.asarray(sorted(int(j) for j in d.blocks[b]), dtype=np.int64)
            rows = np.flatnonzero(row_owner == b)
            bmap = np.full(lp.n_cols, -1, dtype=np.int64)
            bmap[cols] = np.arange(len(cols))
            rm = np.full(lp.n_rows, -1, dtype=np.int64)
            rm[rows] = np.arange(len(rows))
            esel = np.flatnonzero(np.isin(lp.a_rows, rows))
            ecols = lp.a_cols[esel]
            inner = esel[owner[ecols] == b]
            outer = esel[owner[ecols] < 0]
            names = None
            if lp.var_names is not None:
                names = [lp.var_names[int(j)] for j in cols]
            self.blocks.append(
                {
                    "cols": cols,
                    "template": LinearProgram(
                        c=lp.c[cols],
                        n_rows=len(rows),
                        a_rows=rm[lp.a_rows[inner]],
                        a_cols=bmap[lp.a_cols[inner]],
                        a_vals=lp.a_vals[inner],
                        row_lower=lp.row_lower[rows],
                        row_upper=lp.row_upper[rows],
                        var_lower=lp.var_lower[cols],
                        var_upper=lp.var_upper[cols],
                        var_names=names,
                    ),
                    "shift": (
                        rm[lp.a_rows[outer]],
                        cpos[lp.a_cols[outer]],
                        lp.a_vals[outer],
                    ),
                    "binary": np.asarray(
                        [bmap[int(j)] for j in p.binary if owner[int(j)] == b],
                        dtype=np.int64,
                    ),
                    "priority": np.asarray(
                        [prio[int(j)] for j in p.binary if owner[int(j)] == b],
                        dtype=np.int64,
                    ),
                }
            )
        self.cache: dict[bytes, tuple[float, np.ndarray | None, bool]] = {}
        self.n_cols = lp.n_cols
        self.usable = True

    def complete(
        self, x: np.ndarray, deadline: float | None
    ) -> tuple[float | None, np.ndarray | None, bool]:
        """Best full solution consistent with the trigger values in ``x``.

        Returns (objective, solution, exact); objective None means no
        completion could be formed, +inf means the assignment is proven
        infeasible.  ``exact`` certifies every block solved to proven
        optimality, which is what subtree pruning requires.
        """
        key = np.round(x[self.trigger]).astype(np.int8).tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.completer is not None:
            got = self.completer(x)
            if got is None:
                return None, None, False
            try:
                xc = np.asarray(
                    [got[int(j)] for j in self.coupling], dtype=np.float64
                )
            except KeyError:
                return None, None, False
        else:
            vals = x[self.coupling]
            if np.any(np.abs(vals - np.round(vals)) > self.settings.int_tol):
                return None, None, False
            xc = np.round(vals)
        rr, rc, rv, lo, hi = self.check
        acc = np.zeros(len(lo))
        np.add.at(acc, rr, rv * xc[rc])
        tol = 1e-6 * (1.0 + np.abs(acc))
        if np.any(acc < lo - tol) or np.any(acc > hi + tol):
            return None, None, False
        z = float(np.dot(self.c_coupling, xc))
        xfull = np.zeros(self.n_cols)
        xfull[self.coupling] = xc
        exact = True
        for blk in self.blocks:
            sr, sc, sv = blk["shift"]
            t = blk["template"]
            shift = np.zeros(t.n_rows)
            np.add.at(shift, sr, sv * xc[sc])
            sub = LinearProgram(
                c=t.c,
                n_rows=t.n_rows,
                a_rows=t.a_rows,
                a_cols=t.a_cols,
                a_vals=t.a_vals,
                row_lower=t.row_lower - shift,
                row_upper=t.row_upper - shift,
                var_lower=t.var_lower,
                var_upper=t.var_upper,
                var_names=t.var_names,
            )
            limit = None
            if deadline is not None:
                limit = max(deadline - time.monotonic(), 0.01)
            res = solve_milp(
                MilpProblem(lp=sub, binary=blk["binary"], priority=blk["priority"]),
                time_limit=limit,
                settings=self.settings,
            )
            if res.status == MILP_INFEASIBLE:
                out = (_INF, None, True)
                self.cache[key] = out
                return out
            if res.objective is None:
                return None, None, False
            exact = exact and res.certified(self.settings.milp_gap_tol)
            z += float(res.objective)
            xfull[blk["cols"]] = res.x
        out = (z, xfull, exact)
        if exact:
            self.cache[key] = out
        return out


def solve_milp(
    p: MilpProblem,
    gap_tol: float | None = None,
    warm_start: dict[int, float] | np.ndarray | None = None,
    time_limit: float | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    heuristics: bool = True,
    hint_fixes: dict[int, float] | None = None,
) -> MilpResult:
    """Branch and bound; see module docstring for the search rules.

    ``warm_start`` fixes every binary to a known assignment to seed the
    incumbent; ``hint_fixes`` pins only a subset and lets a dive complete
    the rest, which tolerates hints that are not exactly optimal.
    """
    p.validate()
    if gap_tol is None:
        gap_tol = settings.milp_gap_tol
    binary = np.asarray(p.binary, dtype=np.int64)
    priority = None if p.priority is None else np.asarray(p.priority, dtype=np.int64)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    rt = None
    if p.decomposition is not None and p.decomposition.blocks:
        cand = _DecompRuntime(p, settings)
        if cand.usable:
            rt = cand

    incumbent_obj = _INF
    incumbent_x: np.ndarray | None = None

    def rel_gap(bound: float) -> float:
        if incumbent_obj == _INF:
            return _INF
        return (incumbent_obj - bound) / max(abs(incumbent_obj), 1e-9)

    if warm_start is not None:
        fixes = (
            {int(j): float(round(warm_start[j])) for j in binary}
            if not isinstance(warm_start, dict)
            else {int(j): float(round(v)) for j, v in warm_start.items()}
        )
        res = solve_lp(_with_fixes(p.lp, fixes), settings)
        if res.status == OPTIMAL:
            incumbent_obj = float(res.objective)
            incumbent_x = res.x.copy()
            incumbent_x[binary] = np.round(incumbent_x[binary])

    root = _solve_node(p.lp, {}, settings, None)
    nodes = 1
    if root.status == INFEASIBLE:
        return MilpResult(status=MILP_INFEASIBLE, nodes=nodes)
    if root.status == UNBOUNDED:
        return MilpResult(status=MILP_UNBOUNDED, nodes=nodes)

    if heuristics and len(binary):
        dived = _dive(p.lp, binary, root, settings, deadline, priority)
        if dived is not None and dived[0] < incumbent_obj:
            incumbent_obj, incumbent_x = dived
    if hint_fixes and len(binary):
        res = solve_lp(_with_fixes(p.lp, hint_fixes), settings)
        if res.status == OPTIMAL:
            dived = _dive(
                p.lp, binary, res, settings, deadline, priority, hint_fixes
            )
            if dived is not None and dived[0] < incumbent_obj:
                incumbent_obj, incumbent_x = dived

    pruned_min = _INF  # lowest bound discarded by the tolerance rule

    # Root presolve against the incumbent: reduced-cost fixing plus
    # one-sided probing, strongest-priority binaries first.  Every value
    # discarded here is accounted into pruned_min at the cutoff active at
    # that moment, so the reported gap stays honest.
    root_fixes: dict[int, float] = {}
    if incumbent_x is not None and len(binary):
        prio_of = {int(j): 0 for j in binary}
        if priority is not None:
            prio_of = {int(j): int(v) for j, v in zip(binary, priority)}
        for _ in range(3):
            cutoff = incumbent_obj - max(gap_tol, 1e-9) * max(
                abs(incumbent_obj), 1e-9
            )
            slack = cutoff - float(root.objective)
            if slack <= 0 or root.reduced_costs is None:
                break
            added = 0
            for j in binary:
                j = int(j)
                if j in root_fixes:
                    continue
                xv = float(root.x[j])
                d = float(root.reduced_costs[j])
                if xv <= settings.int_tol and d >= slack:
                    root_fixes[j] = 0.0
                elif xv >= 1.0 - settings.int_tol and -d >= slack:
                    root_fixes[j] = 1.0
                else:
                    continue
                added += 1
                pruned_min = min(pruned_min, cutoff)
            probe = sorted(
                (int(j) for j in binary if int(j) not in root_fixes),
                key=lambda j: (-prio_of[j], j),
            )
            for j in probe[: settings.probe_limit]:
                if deadline is not None and time.monotonic() > deadline:
                    break
                keep = _round_half_up(float(root.x[j]))
                trial = solve_lp(
                    _with_fixes(p.lp, {**root_fixes, j: 1.0 - keep}),
                    settings,
                    warm_basis=root.basis,
                )
                nodes += 1
                if trial.status == INFEASIBLE or (
                    trial.status == OPTIMAL and trial.objective >= cutoff
                ):
                    root_fixes[j] = keep
                    pruned_min = min(pruned_min, cutoff)
                    added += 1
            if not added:
                break
            refreshed = _solve_node(p.lp, root_fixes, settings, root.basis)
            nodes += 1
            if refreshed.status != OPTIMAL:
                bound = min(incumbent_obj, pruned_min)
                return MilpResult(
                    status=MILP_OPTIMAL,
                    objective=incumbent_obj,
                    x=incumbent_x,
                    bound=bound,
                    gap=max(rel_gap(bound), 0.0),
                    nodes=nodes,
                )
            root = refreshed

    heap: list[_Node] = []
    stack: list[_Node] = []
    seq = 0
    heapq.heappush(heap, _Node(float(root.objective), seq, {}, root.basis, root))
    best_bound = float(root.objective)
    fix_level = incumbent_obj  # incumbent value at the last fixing sweep

    def open_bound() -> float:
        vals = [incumbent_obj]
        if heap:
            vals.append(min(heap).bound)
        if stack:
            vals.append(min(n.bound for n in stack))
        return min(vals)

    while heap or stack:
        if deadline is not None and time.monotonic() > deadline:
            best_bound = open_bound()
            if incumbent_x is None:
                return MilpResult(
                    status=MILP_NO_INCUMBENT, bound=best_bound, nodes=nodes
                )
            return MilpResult(
                status=MILP_TIME_LIMIT,
                objective=incumbent_obj,
                x=incumbent_x,
                bound=best_bound,
                gap=max(rel_gap(best_bound), 0.0),
                nodes=nodes,
            )
        if stack and incumbent_x is not None:
            # First feasible point found: fall back to best-bound order.
            for n in stack:
                heapq.heappush(heap, n)
            stack.clear()
        if stack:
            node = stack.pop()
        else:
            node = heapq.heappop(heap)
            # Best-bound order makes the popped bound the global lower
            # bound; at the incumbent the incumbent itself is the bound.
            best_bound = min(node.bound, incumbent_obj)
        if incumbent_obj < _INF and rel_gap(best_bound) <= gap_tol:
            return MilpResult(
                status=MILP_OPTIMAL,
                objective=incumbent_obj,
                x=incumbent_x,
                bound=best_bound,
                gap=max(rel_gap(best_bound), 0.0),
                nodes=nodes,
            )
        # Prune to the requested tolerance: anything that cannot beat the
        # incumbent by more than the certified gap is not worth exploring.
        cutoff = incumbent_obj - max(gap_tol, 1e-9) * max(abs(incumbent_obj), 1e-9)
        if node.bound >= cutoff:
            pruned_min = min(pruned_min, node.bound)
            continue
        if incumbent_obj < fix_level - 1e-12 and root.reduced_costs is not None:
            # The incumbent improved: repeat reduced-cost fixing against the
            # tighter cutoff, shrinking every node solved from here on.
            fix_level = incumbent_obj
            slack = cutoff - float(root.objective)
            if slack > 0:
                for j in binary:
                    j = int(j)
                    if j in root_fixes:
                        continue
                    xv = float(root.x[j])
                    d = float(root.reduced_costs[j])
                    if xv <= settings.int_tol and d >= slack:
                        root_fixes[j] = 0.0
                    elif xv >= 1.0 - settings.int_tol and -d >= slack:
                        root_fixes[j] = 1.0
                    else:
                        continue
                    pruned_min = min(pruned_min, cutoff)
        if node.res is not None:
            res = node.res
        else:
            res = _solve_node(
                p.lp, {**root_fixes, **node.fixes}, settings, node.basis
            )
            nodes += 1
        if nodes > settings.max_nodes:
            raise SolverError("node limit exceeded")
        if res.status != OPTIMAL:
            continue
        if res.objective >= cutoff:
            pruned_min = min(pruned_min, float(res.objective))
            continue
        if (
            heuristics
            and incumbent_x is None
            and nodes % settings.dive_retry_nodes == 0
        ):
            # Still no feasible point: re-dive from this node, whose fixes
            # already pin down part of the structure.
            dived = _dive(
                p.lp,
                binary,
                res,
                settings,
                deadline,
                priority,
                {**root_fixes, **node.fixes},
            )
            if dived is not None:
                incumbent_obj, incumbent_x = dived
        branch_var = -1
        chain: list[int] = []
        if rt is not None:
            trig = rt.trigger
            if np.any(np.abs(res.x[trig] - np.round(res.x[trig])) > settings.int_tol):
                branch_var = _most_fractional(
                    res.x, trig, settings.int_tol, rt.trigger_priority
                )
                if rt.rounder is not None:
                    # Relaxation-guided rounding: completions of the rounded
                    # trigger are feasible everywhere, so any improvement
                    # feeds the incumbent.  The completion cache makes the
                    # frequent repeats of one rounding nearly free.
                    xr = rt.rounder(res.x)
                    if xr is not None:
                        z_hat, x_hat, _ = rt.complete(xr, deadline)
                        if x_hat is not None and z_hat < incumbent_obj - 1e-12:
                            incumbent_obj = float(z_hat)
                            incumbent_x = x_hat
            else:
                z_hat, x_hat, exact = rt.complete(res.x, deadline)
                if x_hat is not None and z_hat < incumbent_obj - 1e-12:
                    incumbent_obj = float(z_hat)
                    incumbent_x = x_hat
                fully = all(
                    int(j) in node.fixes or int(j) in root_fixes for j in trig
                )
                if z_hat is None:
                    # No completion available: plain branch and bound keeps
                    # the search exact below this node.
                    branch_var = _most_fractional(
                        res.x, binary, settings.int_tol, priority
                    )
                elif exact and fully:
                    # The subtree is exactly this trigger assignment and its
                    # best completion is already folded into the incumbent.
                    continue
                elif exact and z_hat <= res.objective + max(gap_tol, 1e-9) * max(
                    abs(z_hat), 1e-9
                ):
                    pruned_min = min(pruned_min, float(res.objective))
                    continue
                elif not exact and fully:
                    pruned_min = min(pruned_min, float(res.objective))
                    continue
                else:
                    chain = [
                        int(j)
                        for j in trig
                        if int(j) not in node.fixes and int(j) not in root_fixes
                    ]
        else:
            branch_var = _most_fractional(res.x, binary, settings.int_tol, priority)
        if branch_var < 0 and not chain:
            xi = res.x.copy()
            xi[binary] = np.round(xi[binary])
            if res.objective < incumbent_obj - 1e-12:
                incumbent_obj = float(res.objective)
                incumbent_x = xi
            continue

        def push(kid: _Node) -> None:
            if incumbent_x is None:
                stack.append(kid)
            else:
                heapq.heappush(heap, kid)

        if chain:
            # Partition the subtree by the first undecided trigger variable
            # that disagrees with the (integral) relaxation values: one flip
            # child per position, then a child pinning the whole trigger.
            # The pinned child's relaxation is the parent's, so it carries
            # ``res`` along and costs no LP solve when popped.
            pinned = dict(node.fixes)
            for j in chain:
                v = _round_half_up(res.x[j])
                flip = dict(pinned)
                flip[j] = 1.0 - v
                seq += 1
                push(_Node(float(res.objective), seq, flip, res.basis))
                pinned[j] = v
            seq += 1
            push(_Node(float(res.objective), seq, pinned, res.basis, res))
            continue
        toward = _round_half_up(res.x[branch_var])
        for v in (1.0 - toward, toward):
            child = dict(node.fixes)
            child[branch_var] = v
            seq += 1
            push(_Node(float(res.objective), seq, child, res.basis))

    if incumbent_x is None:
        return MilpResult(status=MILP_INFEASIBLE, nodes=nodes)
    bound = min(incumbent_obj, pruned_min)
    return MilpResult(
        status=MILP_OPTIMAL,
        objective=incumbent_obj,
        x=incumbent_x,
        bound=bound,
        gap=max(rel_gap(bound), 0.0),
        nodes=nodes,
    )
