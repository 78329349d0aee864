"""Exhaustive reference implementations for desk-scale validation.

Everything here enumerates rather than optimizes: operating states are
all cable subsets that pass a direct feasibility check, the post-fault
outcome is the best surviving state, and the optimal layout is found by
trying candidate subsets in order of investment with a sound
investment-only lower bound as the single pruning rule.

The feasibility check mirrors the optimization model's accounting
identity: an energized set is valid exactly when it is a forest whose
every component contains one substation, every touched turbine is
served, and cable/feeder limits plus voltage-angle bounds hold on the
resulting (unique) tree flows.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import OSS, WT, PlanningInstance
from .scenarios import (
    ReliabilityParams,
    annuity_factor,
    cable_unavailability,
    curtailment_cost_coefficient,
)

_TOL = 1e-9


class OracleScaleError(RuntimeError):
    """Raised when an input is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class FaultCase:
    scenario_id: str
    failed: tuple[int, ...]
    probability: float


@dataclass(frozen=True)
class OperatingState:
    energized: tuple[int, ...]
    served: frozenset[int]


@dataclass(frozen=True)
class ReconfigOutcome:
    offline: tuple[int, ...]
    energized: tuple[int, ...]
    served_mw: float


@dataclass(frozen=True)
class OracleLayout:
    installed: tuple[int, ...]
    cable_types: tuple[int, ...]
    normal: tuple[int, ...]
    objective: float
    investment: float
    om: float
    reliability: float


def fault_cases(inst: PlanningInstance) -> list[FaultCase]:
    """The fault states of the instance, in scenario-id order."""
    if inst.options.multi_fault_sets:
        return [
            FaultCase(f"u{k}", tuple(fs.cables), fs.probability)
            for k, fs in enumerate(inst.options.multi_fault_sets)
        ]
    return [
        FaultCase(
            f"f{c.index}", (c.index,), cable_unavailability(c.reliability)
        )
        for c in inst.cables
    ]


def _case_coefficients(
    inst: PlanningInstance, case: FaultCase
) -> tuple[dict[int, float], dict[int, float]]:
    """Per-turbine cost of the switching flag (cm) and repair flag (cn)."""
    base = inst.cables[case.failed[0]].reliability
    rel = ReliabilityParams(
        failure_rate=case.probability,
        repair_rate=1.0 - case.probability,
        tau_sw=base.tau_sw,
        tau_rp=base.tau_rp,
    )
    cm: dict[int, float] = {}
    cn: dict[int, float] = {}
    for k in inst.wt_ids:
        a = b = 0.0
        for w in inst.wind:
            da, db = curtailment_cost_coefficient(
                inst.node(k).rated_mw, w, rel, inst.economics
            )
            a += da
            b += db
        cm[k] = a
        cn[k] = b
    return cm, cn


def _feasible_served(
    inst: PlanningInstance,
    edges: Iterable[int],
    caps: dict[int, float],
    feeders_by_root: dict[int, list],
) -> frozenset[int] | None:
    """Served turbines of an energized set, or None if it is invalid.

    Valid means: forest, one OSS per component, no touched-but-unserved
    turbine, tree flows within cable and feeder limits, angles within
    the bound.
    """
    edge_list = list(edges)
    if not edge_list:
        return frozenset()
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in edge_list:
        c = inst.cables[e]
        adj.setdefault(c.i, []).append((c.j, e))
        adj.setdefault(c.j, []).append((c.i, e))
    served = frozenset(v for v in adj if inst.node(v).kind == WT)
    if len(edge_list) != len(served):
        return None
    theta_max = inst.options.theta_max
    seen: set[int] = set()
    for start in sorted(adj):
        if start in seen:
            continue
        comp: list[int] = []
        half_edges = 0
        roots: list[int] = []
        queue = deque([start])
        seen.add(start)
        while queue:
            u = queue.popleft()
            comp.append(u)
            if inst.node(u).kind == OSS:
                roots.append(u)
            for v, _ in adj[u]:
                half_edges += 1
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        if len(roots) != 1 or half_edges // 2 != len(comp) - 1:
            return None
        # unique tree flows: accumulate loads leaf-to-root, then angles
        root = roots[0]
        order: list[int] = []
        parent: dict[int, tuple[int, int]] = {}
        visited = {root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v, e in adj[u]:
                if v not in visited:
                    visited.add(v)
                    parent[v] = (u, e)
                    queue.append(v)
        load = {u: inst.node(u).rated_mw if inst.node(u).kind == WT else 0.0
                for u in order}
        for u in reversed(order[1:]):
            load[parent[u][0]] += load[u]
        theta = {root: 0.0}
        for u in order[1:]:
            pu, e = parent[u]
            c = inst.cables[e]
            flow = load[u] if c.i == u else -load[u]
            if abs(flow) > caps[e] + _TOL:
                return None
            theta[u] = theta[pu] + load[u] / c.susceptance
            if inst.node(u).kind == WT and abs(theta[u]) > theta_max + _TOL:
                return None
        for v, e in adj[root]:
            for f in feeders_by_root.get(e, ()):
                if load[v] > f.capacity + _TOL:
                    return None
    return served


def _feeders_by_root(inst: PlanningInstance) -> dict[int, list]:
    out: dict[int, list] = {}
    for f in inst.feeders:
        out.setdefault(f.root_cable, []).append(f)
    return out


def _default_caps(inst: PlanningInstance) -> dict[int, float]:
    return {c.index: c.capacity for c in inst.cables}


def operating_states(
    inst: PlanningInstance,
    installed: Sequence[int],
    caps: dict[int, float] | None = None,
) -> list[OperatingState]:
    """All feasible energized subsets of the installed cables."""
    caps = caps if caps is not None else _default_caps(inst)
    by_root = _feeders_by_root(inst)
    n_wt = len(inst.wt_ids)
    states = [OperatingState((), frozenset())]
    pool = sorted(installed)
    for size in range(1, min(n_wt, len(pool)) + 1):
        for combo in itertools.combinations(pool, size):
            served = _feasible_served(inst, combo, caps, by_root)
            if served is not None:
                states.append(OperatingState(combo, served))
    return states


def _feeder_partition(
    inst: PlanningInstance, normal_edges: Sequence[int]
) -> tuple[dict[int, int], dict[int, frozenset[int]]]:
    """Map each energized cable to its feeder root cable, and each root
    to the turbines hanging from it."""
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in normal_edges:
        c = inst.cables[e]
        adj.setdefault(c.i, []).append((c.j, e))
        adj.setdefault(c.j, []).append((c.i, e))
    edge_root: dict[int, int] = {}
    root_wts: dict[int, set[int]] = {}
    for oss in inst.oss_ids:
        for first, root_edge in adj.get(oss, ()):
            wts = root_wts.setdefault(root_edge, set())
            edge_root[root_edge] = root_edge
            queue = deque([(first, oss)])
            while queue:
                u, prev = queue.popleft()
                if inst.node(u).kind == WT:
                    wts.add(u)
                for v, e in adj[u]:
                    if v == prev:
                        continue
                    edge_root[e] = root_edge
                    queue.append((v, u))
    return edge_root, {r: frozenset(s) for r, s in root_wts.items()}


def simulate_fault_impact(
    inst: PlanningInstance,
    normal_edges: Sequence[int],
    failed: Iterable[int],
) -> frozenset[int]:
    """Turbines knocked out while the fault is switched free: every
    turbine of each feeder that contains a failed energized cable."""
    edge_root, root_wts = _feeder_partition(inst, normal_edges)
    hit: set[int] = set()
    for c in failed:
        root = edge_root.get(c)
        if root is not None:
            hit |= root_wts[root]
    return frozenset(hit)


def best_reconfiguration(
    inst: PlanningInstance,
    installed: Sequence[int],
    normal_edges: Sequence[int],
    failed: Iterable[int],
    caps: dict[int, float] | None = None,
    states: Sequence[OperatingState] | None = None,
) -> ReconfigOutcome:
    """Cheapest repair-period outcome after a fault.

    Turbines inside the switching impact can stay offline at the cost of
    the repair-period term only; a turbine whose feeder survived can
    also be dropped, but then pays the switching premium too (the outage
    hierarchy allows it and it is occasionally cheaper when post-fault
    capacity is tight).  The weights are the switching/repair duration
    shares of the failed cable; the fault probability scales both terms
    equally and cannot change the choice.  Ties break toward fewer
    offline turbines, then lexicographically smallest offline and
    energized sets.
    """
    failed_set = frozenset(failed)
    if not failed_set:
        raise ValueError("reconfiguration needs at least one failed cable")
    if states is None:
        if len(tuple(installed)) > 15:
            raise OracleScaleError(
                "reconfiguration enumeration limited to 15 installed cables"
            )
        states = operating_states(inst, installed, caps)
    impact = simulate_fault_impact(inst, normal_edges, failed_set)
    rel = inst.cables[min(failed_set)].reliability
    w_sw = rel.tau_sw / (rel.tau_sw + rel.tau_rp)
    w_rp = rel.tau_rp / (rel.tau_sw + rel.tau_rp)
    wt_set = set(inst.wt_ids)
    best_key = None
    best: ReconfigOutcome | None = None
    for st in states:
        if failed_set & set(st.energized):
            continue
        offline = tuple(sorted(wt_set - st.served))
        cost = sum(
            (w_rp + (0.0 if k in impact else w_sw)) * inst.node(k).rated_mw
            for k in offline
        )
        key = (cost, len(offline), offline, st.energized)
        if best_key is None or key < best_key:
            best_key = key
            best = ReconfigOutcome(
                offline=offline,
                energized=st.energized,
                served_mw=sum(inst.node(k).rated_mw for k in st.served),
            )
    assert best is not None  # the all-offline empty state is always available
    return best


def _investment(inst: PlanningInstance, installed, assignment) -> float:
    if assignment:
        types = inst.options.cable_types
        return sum(
            types[v].cost_per_km * inst.cables[e].length
            for e, v in zip(installed, assignment)
        )
    return sum(inst.cable_investment(e) for e in installed)


def _evaluate_layout(
    inst: PlanningInstance,
    installed: tuple[int, ...],
    assignment: tuple[int, ...],
    weight: float,
    cases: Sequence[FaultCase],
    coefs: Sequence[tuple[dict[int, float], dict[int, float]]],
    bound: float | None,
) -> OracleLayout | None:
    if assignment:
        types = inst.options.cable_types
        caps = {e: types[v].capacity for e, v in zip(installed, assignment)}
    else:
        caps = {e: inst.cables[e].capacity for e in installed}
    invest = _investment(inst, installed, assignment)
    fixed = invest * weight
    if bound is not None and fixed >= bound - 1e-12:
        return None
    states = operating_states(inst, installed, caps)
    wt_set = frozenset(inst.wt_ids)
    normals = [st for st in states if st.served == wt_set]
    if inst.options.radial_restriction:
        normals = [st for st in normals if set(st.energized) == set(installed)]
    if not normals:
        return None
    best: OracleLayout | None = None
    memo: dict[tuple[tuple[int, ...], frozenset[int]], ReconfigOutcome] = {}
    for tree in normals:
        rel = 0.0
        ceiling = bound if best is None else min(
            bound if bound is not None else float("inf"), best.objective
        )
        abandoned = False
        for case, (cm, cn) in zip(cases, coefs):
            impact = simulate_fault_impact(inst, tree.energized, case.failed)
            if not impact:
                continue
            key = (case.failed, impact)
            out = memo.get(key)
            if out is None:
                out = best_reconfiguration(
                    inst, installed, tree.energized, case.failed,
                    caps=caps, states=states,
                )
                memo[key] = out
            # switching premium for the hit feeders plus any turbine kept
            # offline beyond them, repair premium for all offline turbines
            rel += sum(cm[k] for k in impact.union(out.offline))
            rel += sum(cn[k] for k in out.offline)
            if ceiling is not None and fixed + rel >= ceiling - 1e-12:
                abandoned = True
                break
        if abandoned:
            continue
        total = fixed + rel
        if best is None or total < best.objective - 1e-12:
            best = OracleLayout(
                installed=installed,
                cable_types=assignment,
                normal=tree.energized,
                objective=total,
                investment=invest,
                om=invest * (weight - 1.0),
                reliability=rel,
            )
    return best


def enumerate_optimal_layout(
    inst: PlanningInstance, max_cables: int = 18
) -> OracleLayout | None:
    """Cheapest layout by exhaustive search, or None if none is feasible."""
    n_cab = len(inst.cables)
    if n_cab > max_cables:
        raise OracleScaleError(
            f"layout enumeration limited to {max_cables} candidate cables"
        )
    econ = inst.economics
    weight = 1.0 + econ.om_fraction * annuity_factor(
        econ.discount_rate, econ.lifetime_years
    )
    cases = fault_cases(inst)
    coefs = [_case_coefficients(inst, c) for c in cases]
    types = inst.options.cable_types
    min_unit = [
        min(t.cost_per_km for t in types) * c.length
        if types
        else inst.cable_investment(c.index)
        for c in inst.cables
    ]
    cross_masks = [(1 << a) | (1 << b) for a, b in inst.crossing]

    def floor_invest(mask: int) -> float:
        return sum(min_unit[e] for e in range(n_cab) if mask >> e & 1)

    order = sorted(range(1, 1 << n_cab), key=floor_invest)
    wt_ids = inst.wt_ids
    n_wt = len(wt_ids)
    best: OracleLayout | None = None
    for mask in order:
        if best is not None and floor_invest(mask) * weight >= best.objective - 1e-12:
            break
        if bin(mask).count("1") < n_wt:
            continue
        if any((mask & cm) == cm for cm in cross_masks):
            continue
        installed = tuple(e for e in range(n_cab) if mask >> e & 1)
        if not _connects_all_wts(inst, installed):
            continue
        if types:
            combos = sorted(
                itertools.product(range(len(types)), repeat=len(installed)),
                key=lambda a: _investment(inst, installed, a),
            )
            if len(combos) > 20000:
                raise OracleScaleError("cable-type assignment space too large")
        else:
            combos = [()]
        for assignment in combos:
            bound = None if best is None else best.objective
            cand = _evaluate_layout(
                inst, installed, tuple(assignment), weight, cases, coefs, bound
            )
            if cand is not None and (best is None or cand.objective < best.objective - 1e-12):
                best = cand
    return best


def _connects_all_wts(inst: PlanningInstance, installed: Sequence[int]) -> bool:
    parent = {n.index: n.index for n in inst.nodes}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in installed:
        c = inst.cables[e]
        parent[find(c.i)] = find(c.j)
    oss_roots = {find(o) for o in inst.oss_ids}
    return all(find(k) in oss_roots for k in inst.wt_ids)
