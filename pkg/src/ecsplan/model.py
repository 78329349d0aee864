"""Two-stage MILP construction for collector-system cable layouts.

First-stage binaries choose which candidate cables to install.  Second
stage describes one operating state per scenario: the no-fault state plus
one state per (set of) failed cable(s).  Each state carries its own
connection pattern, DC power flow, and curtailment flags; reconnection
after a fault is free to re-route power over any installed cable.

Curtailment is split into two periods: while the faulted feeder is being
switched out, every turbine of that feeder is offline (flag m); during
the repair itself only turbines that cannot be re-fed stay offline
(flag n).  Wind variability enters through objective weights only — the
flow model is sized at rated output, which is the binding case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import chain, combinations
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Point, Segment, crossing_pairs, euclidean_length
from .scenarios import (
    EconomicParams,
    ReliabilityParams,
    WindScenario,
    annuity_factor,
    cable_unavailability,
    curtailment_cost_coefficient,
    normal_state_probability,
    validate_wind_scenarios,
)
from .solver.lp import LpBuilder
from .solver.milp import Decomposition, MilpProblem, MilpResult, solve_milp
from .solver.settings import DEFAULT_SETTINGS, SolverSettings

WT = "WT"
OSS = "OSS"
NORMAL_SCENARIO = "NO"

_INF = float("inf")


class ModelError(ValueError):
    """Raised for structurally invalid instances or solutions."""


class Node(NamedTuple):
    index: int
    x: float
    y: float
    kind: str
    rated_mw: float = 0.0

    @property
    def point(self) -> Point:
        return Point(self.x, self.y)


@dataclass(frozen=True)
class CandidateCable:
    """One installable cable between nodes ``i < j``.

    ``capacity`` is the thermal limit in MW, ``susceptance`` the DC-flow
    coefficient in MW per radian.  ``cost_per_km`` overrides the farm-wide
    figure when set.
    """

    index: int
    i: int
    j: int
    length: float
    capacity: float
    susceptance: float
    reliability: ReliabilityParams
    cost_per_km: float | None = None

    def __post_init__(self) -> None:
        if self.i >= self.j:
            raise ModelError(f"cable {self.index}: endpoints must satisfy i < j")
        if self.length <= 0.0 or self.capacity <= 0.0 or self.susceptance <= 0.0:
            raise ModelError(f"cable {self.index}: length/capacity/susceptance must be positive")


@dataclass(frozen=True)
class CableType:
    cost_per_km: float
    capacity: float


@dataclass(frozen=True)
class Feeder:
    """A potential radial string rooted at an OSS-incident cable."""

    fid: int
    root_cable: int
    oss: int
    capacity: float


@dataclass(frozen=True)
class MultiFaultSet:
    cables: tuple[int, ...]
    probability: float


@dataclass(frozen=True)
class ModelOptions:
    allow_oss_interconnect: bool = False
    radial_restriction: bool = False
    theta_max: float = 1.0
    feeder_capacity: float | None = None
    multi_fault_sets: tuple[MultiFaultSet, ...] = ()
    cable_types: tuple[CableType, ...] = ()
    # redundant degree rows that tighten the LP relaxation considerably
    valid_inequalities: bool = True


@dataclass(frozen=True)
class PlanningInstance:
    nodes: tuple[Node, ...]
    cables: tuple[CandidateCable, ...]
    wind: tuple[WindScenario, ...]
    economics: EconomicParams
    feeders: tuple[Feeder, ...]
    crossing: frozenset[tuple[int, int]]
    options: ModelOptions

    @property
    def wt_ids(self) -> tuple[int, ...]:
        return tuple(n.index for n in self.nodes if n.kind == WT)

    @property
    def oss_ids(self) -> tuple[int, ...]:
        return tuple(n.index for n in self.nodes if n.kind == OSS)

    def node(self, idx: int) -> Node:
        return self.nodes[idx]

    def cable_investment(self, e: int) -> float:
        cable = self.cables[e]
        per_km = (
            cable.cost_per_km
            if cable.cost_per_km is not None
            else self.economics.cable_cost_per_km
        )
        return per_km * cable.length

    def scenario_ids(self) -> tuple[str, ...]:
        """Operating states in canonical order: no-fault first, then faults."""
        if self.options.multi_fault_sets:
            faults = tuple(f"u{k}" for k in range(len(self.options.multi_fault_sets)))
        else:
            faults = tuple(f"f{c.index}" for c in self.cables)
        return (NORMAL_SCENARIO,) + faults

    def fault_probability(self, sid: str) -> float:
        if sid.startswith("u"):
            return self.options.multi_fault_sets[int(sid[1:])].probability
        return cable_unavailability(self.cables[int(sid[1:])].reliability)

    def fault_members(self, sid: str) -> tuple[int, ...]:
        """Cables failed in scenario ``sid``."""
        if sid == NORMAL_SCENARIO:
            return ()
        if sid.startswith("u"):
            return self.options.multi_fault_sets[int(sid[1:])].cables
        return (int(sid[1:]),)

    def scenario_of_cable(self, e: int) -> tuple[str, ...]:
        """Fault scenarios that involve cable ``e``."""
        if self.options.multi_fault_sets:
            return tuple(
                f"u{k}"
                for k, fs in enumerate(self.options.multi_fault_sets)
                if e in fs.cables
            )
        return (f"f{e}",)


def make_instance(
    nodes: Sequence[Node | tuple],
    cables: Sequence[CandidateCable],
    wind: Sequence[WindScenario],
    economics: EconomicParams,
    options: ModelOptions | None = None,
    feeders: Sequence[Feeder] | None = None,
    crossing: frozenset[tuple[int, int]] | None = None,
) -> PlanningInstance:
    """Validate raw pieces and assemble a planning instance.

    Feeders default to one per OSS-incident candidate cable; the crossing
    set defaults to strict segment-crossing pairs of the candidate list.
    """
    options = options or ModelOptions()
    node_tuple = tuple(n if isinstance(n, Node) else Node(*n) for n in nodes)
    for pos, n in enumerate(node_tuple):
        if n.index != pos:
            raise ModelError(f"node at position {pos} carries index {n.index}")
        if n.kind not in (WT, OSS):
            raise ModelError(f"node {n.index}: unknown kind {n.kind!r}")
        if n.kind == WT and n.rated_mw <= 0.0:
            raise ModelError(f"turbine node {n.index} needs positive rated power")
    kinds = {n.index: n.kind for n in node_tuple}
    if WT not in kinds.values() or OSS not in kinds.values():
        raise ModelError("instance needs at least one turbine and one substation")

    cable_tuple = tuple(cables)
    seen: set[tuple[int, int]] = set()
    for pos, c in enumerate(cable_tuple):
        if c.index != pos:
            raise ModelError(f"cable at position {pos} carries index {c.index}")
        if c.i not in kinds or c.j not in kinds:
            raise ModelError(f"cable {c.index}: endpoint not a node")
        if (c.i, c.j) in seen:
            raise ModelError(f"duplicate candidate cable {c.i}-{c.j}")
        seen.add((c.i, c.j))
        if kinds[c.i] == OSS and kinds[c.j] == OSS and not options.allow_oss_interconnect:
            raise ModelError(
                f"cable {c.index} joins two substations; "
                "enable allow_oss_interconnect to permit it"
            )

    validate_wind_scenarios(wind)
    if options.multi_fault_sets:
        for k, fs in enumerate(options.multi_fault_sets):
            if not fs.cables:
                raise ModelError(f"fault set u{k} is empty")
            for e in fs.cables:
                if not 0 <= e < len(cable_tuple):
                    raise ModelError(f"fault set u{k}: unknown cable {e}")
            taus = {
                (cable_tuple[e].reliability.tau_sw, cable_tuple[e].reliability.tau_rp)
                for e in fs.cables
            }
            if len(taus) > 1:
                raise ModelError(
                    f"fault set u{k}: members disagree on switching/repair durations"
                )
        normal_state_probability(fs.probability for fs in options.multi_fault_sets)
    else:
        normal_state_probability(
            cable_unavailability(c.reliability) for c in cable_tuple
        )

    if feeders is None:
        cap = options.feeder_capacity if options.feeder_capacity is not None else _INF
        derived = []
        for c in cable_tuple:
            endpoints_oss = [v for v in (c.i, c.j) if kinds[v] == OSS]
            if not endpoints_oss:
                continue
            derived.append(Feeder(len(derived), c.index, min(endpoints_oss), cap))
        feeders = derived
    feeder_tuple = tuple(feeders)
    for f in feeder_tuple:
        root = cable_tuple[f.root_cable]
        if kinds.get(f.oss) != OSS or f.oss not in (root.i, root.j):
            raise ModelError(f"feeder {f.fid}: host {f.oss} is not an OSS endpoint of its root")

    if crossing is None:
        segments = [
            Segment(node_tuple[c.i].point, node_tuple[c.j].point) for c in cable_tuple
        ]
        crossing = frozenset(crossing_pairs(segments))

    return PlanningInstance(
        nodes=node_tuple,
        cables=cable_tuple,
        wind=tuple(wind),
        economics=economics,
        feeders=feeder_tuple,
        crossing=crossing,
        options=options,
    )


def _synthetic_reliability(xi: float, tau_sw: float, tau_rp: float) -> ReliabilityParams:
    """Reliability record whose unavailability equals ``xi`` exactly."""
    if not 0.0 <= xi < 1.0:
        raise ModelError(f"scenario probability {xi} outside [0, 1)")
    return ReliabilityParams(
        failure_rate=xi, repair_rate=1.0 - xi, tau_sw=tau_sw, tau_rp=tau_rp
    )


@dataclass
class MilpModelHandle:
    """A built MILP plus every index map needed to read a solution back.

    ``var_block`` marks master variables with -1 and block variables with
    the position of their scenario in ``scenario_ids`` — the layout the
    decomposition solver expects.  ``row_tags`` aligns one constraint-family
    tag with each row; families realized as variable bounds are listed in
    ``bound_tags`` instead.
    """

    problem: MilpProblem
    var_block: np.ndarray
    instance: PlanningInstance
    scenario_ids: tuple[str, ...]
    scenario_prob: dict[str, float]
    wind_subset: tuple[int, ...]
    install: dict[int, int]
    install_type: dict[tuple[int, int], int]
    connect: dict[tuple[str, int], int]
    impact: dict[tuple[str, int], int]
    offline: dict[tuple[str, int], int]
    member_impact: dict[tuple[int, int], int]
    wt_feeder: dict[tuple[int, int], int]
    cable_feeder: dict[tuple[int, int], int]
    flow: dict[tuple[str, int], int]
    angle: dict[tuple[str, int], int]
    output: dict[tuple[str, int], int]
    feeder_flow: dict[tuple[str, int], int]
    row_tags: list[str]
    bound_tags: dict[str, str]
    big_m: float

    def tag_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for t in self.row_tags:
            counts[t] = counts.get(t, 0) + 1
        return counts


class _Builder:
    def __init__(
        self,
        inst: PlanningInstance,
        reduced: Sequence[str],
        wind_subset: tuple[int, ...],
    ):
        self.inst = inst
        self.types = inst.options.cable_types
        self.lp = LpBuilder()
        self.tags: list[str] = []
        self.scenarios = tuple(reduced)
        self.wind_subset = wind_subset
        self.block_of = {sid: b for b, sid in enumerate(self.scenarios)}
        rated_total = sum(inst.node(k).rated_mw for k in inst.wt_ids)
        b_max = max(c.susceptance for c in inst.cables)
        self.big_m = rated_total + b_max * 2.0 * inst.options.theta_max
        # probability mass not covered by the reduced set is treated as
        # normal operation
        fault_mass = sum(inst.fault_probability(s) for s in self.scenarios[1:])
        full_mass = sum(
            inst.fault_probability(s) for s in inst.scenario_ids()[1:]
        )
        if fault_mass > full_mass + 1e-12:
            raise ModelError("reduced scenario probabilities exceed the full set")
        self.prob = {s: inst.fault_probability(s) for s in self.scenarios[1:]}
        self.prob[NORMAL_SCENARIO] = 1.0 - fault_mass

        self.install: dict[int, int] = {}
        self.install_type: dict[tuple[int, int], int] = {}
        self.connect: dict[tuple[str, int], int] = {}
        self.impact: dict[tuple[str, int], int] = {}
        self.offline: dict[tuple[str, int], int] = {}
        self.member_impact: dict[tuple[int, int], int] = {}
        self.wt_feeder: dict[tuple[int, int], int] = {}
        self.cable_feeder: dict[tuple[int, int], int] = {}
        self.flow: dict[tuple[str, int], int] = {}
        self.angle: dict[tuple[str, int], int] = {}
        self.output: dict[tuple[str, int], int] = {}
        self.feeder_flow: dict[tuple[str, int], int] = {}
        self.binary: list[int] = []
        self.bin_priority: list[int] = []
        self.block_vars: list[tuple[int, int]] = []  # (var, block)
        self.bound_tags: dict[str, str] = {}

    def bin_var(self, name: str, hi: float = 1.0, priority: int = 1) -> int:
        j = self.lp.add_var(0.0, hi, 0.0, name)
        self.binary.append(j)
        self.bin_priority.append(priority)
        return j

    def row(self, tag: str, coeffs: dict[int, float], lo: float, hi: float, name: str) -> None:
        self.lp.add_row(coeffs, lo, hi, name)
        self.tags.append(tag)

    # ---- variables -------------------------------------------------

    def first_stage(self) -> None:
        inst = self.inst
        invest_weight = 1.0 + inst.economics.om_fraction * annuity_factor(
            inst.economics.discount_rate, inst.economics.lifetime_years
        )
        for c in inst.cables:
            j = self.bin_var(f"l[{c.i},{c.j}]", priority=4)
            self.install[c.index] = j
            if not self.types:
                self.lp.set_objective(j, inst.cable_investment(c.index) * invest_weight)
        for c in inst.cables:
            for v, ct in enumerate(self.types):
                j = self.bin_var(f"lt[{c.i},{c.j},{v}]", priority=4)
                self.install_type[(c.index, v)] = j
                self.lp.set_objective(j, ct.cost_per_km * c.length * invest_weight)

    def affiliation_vars(self) -> None:
        for f in self.inst.feeders:
            for c in self.inst.cables:
                self.cable_feeder[(f.fid, c.index)] = self.bin_var(
                    f"hc[{f.fid},{c.i},{c.j}]"
                )
            for k in self.inst.wt_ids:
                self.wt_feeder[(f.fid, k)] = self.bin_var(f"hw[{f.fid},{k}]")

    def scenario_binaries(self, sid: str) -> None:
        inst = self.inst
        failed = set(inst.fault_members(sid))
        normal = sid == NORMAL_SCENARIO
        for c in inst.cables:
            # failed cables cannot reconnect: connection fixed to 0
            hi = 0.0 if c.index in failed else 1.0
            self.connect[(sid, c.index)] = self.bin_var(
                f"s[{sid},{c.i},{c.j}]", hi, priority=3 if normal else 2
            )
        coeffs = None if normal else self.curtailment_coeffs(sid)
        for k in inst.wt_ids:
            # no curtailment flags can be raised in the no-fault state
            m = self.bin_var(f"m[{sid},{k}]", 0.0 if normal else 1.0)
            n = self.bin_var(f"n[{sid},{k}]", 0.0 if normal else 1.0)
            self.impact[(sid, k)] = m
            self.offline[(sid, k)] = n
            if coeffs is not None:
                cm, cn = coeffs[k]
                self.lp.set_objective(m, cm)
                self.lp.set_objective(n, cn)

    def curtailment_coeffs(self, sid: str) -> dict[int, tuple[float, float]]:
        inst = self.inst
        xi = self.prob[sid]
        member = inst.cables[inst.fault_members(sid)[0]].reliability
        rel = _synthetic_reliability(xi, member.tau_sw, member.tau_rp)
        out: dict[int, tuple[float, float]] = {}
        for k in inst.wt_ids:
            cm = cn = 0.0
            for w in self.wind_subset:
                a, b = curtailment_cost_coefficient(
                    inst.node(k).rated_mw, inst.wind[w], rel, inst.economics
                )
                cm += a
                cn += b
            out[k] = (cm, cn)
        return out

    def scenario_continuous(self, sid: str) -> None:
        inst = self.inst
        block = self.block_of[sid]
        max_cap = max((t.capacity for t in self.types), default=0.0)
        for c in inst.cables:
            cap = max_cap if self.types else c.capacity
            j = self.lp.add_var(-cap, cap, 0.0, f"P[{sid},{c.i},{c.j}]")
            self.flow[(sid, c.index)] = j
            self.block_vars.append((j, block))
        theta = inst.options.theta_max
        for k in inst.wt_ids:
            j = self.lp.add_var(-theta, theta, 0.0, f"th[{sid},{k}]")
            self.angle[(sid, k)] = j
            self.block_vars.append((j, block))
            p = self.lp.add_var(0.0, inst.node(k).rated_mw, 0.0, f"Pw[{sid},{k}]")
            self.output[(sid, k)] = p
            self.block_vars.append((p, block))
        for f in inst.feeders:
            j = self.lp.add_var(-_INF, f.capacity, 0.0, f"Pf[{sid},{f.fid}]")
            self.feeder_flow[(sid, f.fid)] = j
            self.block_vars.append((j, block))

    # ---- constraints -----------------------------------------------

    def affiliation_rows(self) -> None:
        inst = self.inst
        wt = set(inst.wt_ids)
        for f in inst.feeders:
            for c in inst.cables:
                hc = self.cable_feeder[(f.fid, c.index)]
                s_no = self.connect[(NORMAL_SCENARIO, c.index)]
                for tag, node in (("eq13", c.i), ("eq14", c.j)):
                    if node not in wt:
                        continue
                    hn = self.wt_feeder[(f.fid, node)]
                    self.row(
                        tag, {hc: 1.0, hn: -1.0, s_no: 1.0}, -_INF, 1.0,
                        f"{tag}a[{f.fid},{c.i},{c.j}]",
                    )
                    self.row(
                        tag, {hc: -1.0, hn: 1.0, s_no: 1.0}, -_INF, 1.0,
                        f"{tag}b[{f.fid},{c.i},{c.j}]",
                    )
                    if inst.options.valid_inequalities:
                        # a feeder member drags its WT endpoints along
                        # (implied at integer points, tighter fractionally)
                        self.row(
                            "vi:aff", {hn: 1.0, hc: -1.0}, 0.0, _INF,
                            f"vi:aff[{f.fid},{c.i},{c.j},{node}]",
                        )
            root = self.cable_feeder[(f.fid, f.root_cable)]
            s_root = self.connect[(NORMAL_SCENARIO, f.root_cable)]
            self.row("eq15", {root: 1.0, s_root: -1.0}, 0.0, 0.0, f"eq15[{f.fid}]")
            for c in inst.cables:
                self.row(
                    "eq16",
                    {
                        self.cable_feeder[(f.fid, c.index)]: 1.0,
                        self.connect[(NORMAL_SCENARIO, c.index)]: -1.0,
                    },
                    -_INF,
                    0.0,
                    f"eq16[{f.fid},{c.i},{c.j}]",
                )
        for k in inst.wt_ids:
            self.row(
                "eq17",
                {self.wt_feeder[(f.fid, k)]: 1.0 for f in inst.feeders},
                -_INF,
                1.0,
                f"eq17[{k}]",
            )
        for c in inst.cables:
            self.row(
                "eq18",
                {self.cable_feeder[(f.fid, c.index)]: 1.0 for f in inst.feeders},
                -_INF,
                1.0,
                f"eq18[{c.i},{c.j}]",
            )

    def impact_rows(self, sid: str) -> None:
        """Fault propagation: the whole affected feeder trips (m flags)."""
        inst = self.inst
        members = inst.fault_members(sid)
        wt = set(inst.wt_ids)
        if inst.options.valid_inequalities:
            # an energized cable shares a feeder with its own WT endpoints,
            # so its fault switches them out; stated directly this keeps
            # the relaxation from hiding outage cost behind fractional
            # affiliation variables
            for c in members:
                cab = inst.cables[c]
                for k in (cab.i, cab.j):
                    if k in wt:
                        self.row(
                            "vi:self",
                            {
                                self.impact[(sid, k)]: 1.0,
                                self.connect[(NORMAL_SCENARIO, c)]: -1.0,
                            },
                            0.0,
                            _INF,
                            f"vi:self[{sid},{k}]",
                        )
        if not inst.options.multi_fault_sets:
            c = members[0]
            for f in inst.feeders:
                hc = self.cable_feeder[(f.fid, c)]
                for k in inst.wt_ids:
                    self.row(
                        "eq12",
                        {
                            self.wt_feeder[(f.fid, k)]: 1.0,
                            hc: 1.0,
                            self.impact[(sid, k)]: -1.0,
                        },
                        -_INF,
                        1.0,
                        f"eq12[{sid},{f.fid},{k}]",
                    )
            return
        for k in inst.wt_ids:
            for c in members:
                aux = self.member_impact[(k, c)]
                self.row(
                    "mf38",
                    {self.impact[(sid, k)]: 1.0, aux: -1.0},
                    0.0,
                    _INF,
                    f"mf38[{sid},{k},{c}]",
                )
            self.row(
                "mf39",
                {
                    self.impact[(sid, k)]: 1.0,
                    **{self.member_impact[(k, c)]: -1.0 for c in members},
                },
                -_INF,
                0.0,
                f"mf39[{sid},{k}]",
            )

    def member_impact_rows(self) -> None:
        """Per-cable impact flags shared by all multi-fault scenarios."""
        inst = self.inst
        union: set[int] = set()
        for s in self.scenarios[1:]:
            union.update(inst.fault_members(s))
        for k in inst.wt_ids:
            for c in sorted(union):
                self.member_impact[(k, c)] = self.bin_var(f"ma[{k},{c}]", priority=0)
        for c in sorted(union):
            for f in inst.feeders:
                hc = self.cable_feeder[(f.fid, c)]
                for k in inst.wt_ids:
                    self.row(
                        "mf37",
                        {
                            self.wt_feeder[(f.fid, k)]: 1.0,
                            hc: 1.0,
                            self.member_impact[(k, c)]: -1.0,
                        },
                        -_INF,
                        1.0,
                        f"mf37[{f.fid},{k},{c}]",
                    )

    def reconfiguration_rows(self, sid: str) -> None:
        inst = self.inst
        for c in inst.cables:
            self.row(
                "eq20",
                {self.connect[(sid, c.index)]: 1.0, self.install[c.index]: -1.0},
                -_INF,
                0.0,
                f"eq20[{sid},{c.i},{c.j}]",
            )
        if sid != NORMAL_SCENARIO:
            for k in inst.wt_ids:
                self.row(
                    "eq21",
                    {self.impact[(sid, k)]: 1.0, self.offline[(sid, k)]: -1.0},
                    0.0,
                    _INF,
                    f"eq21[{sid},{k}]",
                )
        coeffs = {self.connect[(sid, c.index)]: 1.0 for c in inst.cables}
        for k in inst.wt_ids:
            coeffs[self.offline[(sid, k)]] = 1.0
        self.row(
            "eq23", coeffs, float(len(inst.wt_ids)), float(len(inst.wt_ids)),
            f"eq23[{sid}]",
        )
        if inst.options.valid_inequalities:
            for k in inst.wt_ids:
                deg = {
                    self.connect[(sid, c.index)]: 1.0
                    for c in inst.cables
                    if k in (c.i, c.j)
                }
                deg[self.offline[(sid, k)]] = 1.0
                self.row("vi:deg", deg, 1.0, _INF, f"vi:deg[{sid},{k}]")

    def flow_rows(self, sid: str) -> None:
        inst = self.inst
        wt = set(inst.wt_ids)
        out_edges: dict[int, list[int]] = {k: [] for k in wt}
        in_edges: dict[int, list[int]] = {k: [] for k in wt}
        for c in inst.cables:
            if c.i in wt:
                out_edges[c.i].append(c.index)
            if c.j in wt:
                in_edges[c.j].append(c.index)
        for k in inst.wt_ids:
            coeffs: dict[int, float] = {}
            for e in out_edges[k]:
                coeffs[self.flow[(sid, e)]] = 1.0
            for e in in_edges[k]:
                coeffs[self.flow[(sid, e)]] = coeffs.get(self.flow[(sid, e)], 0.0) - 1.0
            coeffs[self.output[(sid, k)]] = -1.0
            self.row("eq5", coeffs, 0.0, 0.0, f"eq5[{sid},{k}]")
        max_type_cap = max((t.capacity for t in self.types), default=0.0)
        for c in inst.cables:
            p = self.flow[(sid, c.index)]
            s = self.connect[(sid, c.index)]
            cap = max_type_cap if self.types else c.capacity
            # per-cable relaxation of the switched DC equation: with the
            # flow bounded by the capacity, |B dtheta - P| never exceeds
            # B*2*theta_max + cap, which is far below the farm-wide M
            m6 = min(self.big_m, c.susceptance * 2.0 * inst.options.theta_max + cap)
            coeffs: dict[int, float] = {p: -1.0, s: m6}
            if c.i in wt:
                coeffs[self.angle[(sid, c.i)]] = c.susceptance
            if c.j in wt:
                coeffs[self.angle[(sid, c.j)]] = -c.susceptance
            self.row("eq6", dict(coeffs), -_INF, m6, f"eq6a[{sid},{c.i},{c.j}]")
            flipped = {v: -w for v, w in coeffs.items()}
            flipped[s] = m6
            self.row("eq6", flipped, -_INF, m6, f"eq6b[{sid},{c.i},{c.j}]")
            m8 = min(self.big_m, cap)
            self.row("eq8", {p: 1.0, s: -m8}, -_INF, 0.0, f"eq8a[{sid},{c.i},{c.j}]")
            self.row("eq8", {p: 1.0, s: m8}, 0.0, _INF, f"eq8b[{sid},{c.i},{c.j}]")
            if self.types:
                caps = {
                    self.install_type[(c.index, v)]: -t.capacity
                    for v, t in enumerate(self.types)
                }
                self.row(
                    "ct42", {p: 1.0, **caps}, -_INF, 0.0, f"ct42a[{sid},{c.i},{c.j}]"
                )
                self.row(
                    "ct42",
                    {p: 1.0, **{v: -w for v, w in caps.items()}},
                    0.0,
                    _INF,
                    f"ct42b[{sid},{c.i},{c.j}]",
                )
        for f in inst.feeders:
            root = inst.cables[f.root_cable]
            sigma = 1.0 if root.j == f.oss else -1.0
            self.row(
                "eq10",
                {
                    self.feeder_flow[(sid, f.fid)]: 1.0,
                    self.flow[(sid, f.root_cable)]: -sigma,
                },
                0.0,
                0.0,
                f"eq10[{sid},{f.fid}]",
            )
        for k in inst.wt_ids:
            rated = inst.node(k).rated_mw
            if sid == NORMAL_SCENARIO:
                self.row(
                    "eq24", {self.output[(sid, k)]: 1.0}, rated, rated,
                    f"eq24[{k}]",
                )
            else:
                self.row(
                    "eq22",
                    {self.output[(sid, k)]: 1.0, self.offline[(sid, k)]: rated},
                    rated,
                    rated,
                    f"eq22[{sid},{k}]",
                )

    def structure_rows(self) -> None:
        inst = self.inst
        for e1, e2 in sorted(inst.crossing):
            self.row(
                "eq27",
                {self.install[e1]: 1.0, self.install[e2]: 1.0},
                -_INF,
                1.0,
                f"eq27[{e1},{e2}]",
            )
        if self.types:
            for c in inst.cables:
                coeffs = {
                    self.install_type[(c.index, v)]: 1.0
                    for v in range(len(self.types))
                }
                coeffs[self.install[c.index]] = -1.0
                self.row("ct43", coeffs, 0.0, 0.0, f"ct43[{c.i},{c.j}]")
        if inst.options.radial_restriction:
            for c in inst.cables:
                self.row(
                    "radial",
                    {
                        self.install[c.index]: 1.0,
                        self.connect[(NORMAL_SCENARIO, c.index)]: -1.0,
                    },
                    0.0,
                    0.0,
                    f"radial[{c.i},{c.j}]",
                )
        if inst.options.valid_inequalities:
            for k in inst.wt_ids:
                # every turbine must be served in the no-fault state, so it
                # needs at least one installed incident cable
                inc = {
                    self.install[c.index]: 1.0
                    for c in inst.cables
                    if k in (c.i, c.j)
                }
                self.row("vi:inc", inc, 1.0, _INF, f"vi:inc[{k}]")
            self.cutset_rows()

    def cutset_rows(self) -> None:
        """Capacity-count cuts over turbine subsets.

        In the no-fault state a turbine set S exports its full rating
        through the energized cables leaving S, so their count is at
        least ceil(load(S) / best throughput across the cut).  The flow
        rows imply the fractional version; the rounding is what this
        adds.  All subsets are enumerated at small scale, only the
        singletons and the whole farm beyond that.  (The same rounding
        holds per fault state with the offline flags on the left, but
        those rows slow the relaxations down more than they tighten
        them, so only the no-fault state is generated.)
        """
        inst = self.inst
        max_type_cap = max((t.capacity for t in self.types), default=0.0)
        feeder_cap: dict[int, float] = {}
        for f in inst.feeders:
            feeder_cap[f.root_cable] = min(
                feeder_cap.get(f.root_cable, _INF), f.capacity
            )
        eff = {}
        for c in inst.cables:
            cap = max_type_cap if self.types else c.capacity
            eff[c.index] = min(cap, feeder_cap.get(c.index, _INF))
        wt = inst.wt_ids
        if len(wt) <= 10:
            subsets = chain.from_iterable(
                combinations(wt, r) for r in range(1, len(wt) + 1)
            )
        else:
            subsets = chain(((k,) for k in wt), [tuple(wt)])
        for sub in subsets:
            inside = set(sub)
            load = sum(inst.node(k).rated_mw for k in sub)
            cut = [
                c.index for c in inst.cables if (c.i in inside) != (c.j in inside)
            ]
            if not cut or load <= 0.0:
                continue
            best = max(eff[e] for e in cut)
            need = math.ceil(load / best - 1e-9)
            coeffs = {self.connect[(NORMAL_SCENARIO, e)]: 1.0 for e in cut}
            self.row(
                "vi:cut", coeffs, float(need), _INF,
                f"vi:cut[{','.join(map(str, sub))}]",
            )

    def decomposition(self) -> Decomposition:
        """Operating-state separability for the branch-and-bound search.

        Conditioned on the installs, the no-fault connections and the
        affiliation/impact auxiliaries, each operating state's response
        (its connections, switching flags and flows) is an independent
        subproblem.  The affiliation variables need not be branched on:
        for an integral no-fault forest the feeder membership is forced
        by the root-cable and propagation equalities, so the completer
        derives them from the forest directly.  The shared per-member
        impact flags are a real cross-state tradeoff and stay in the
        branching trigger.
        """
        inst = self.inst
        per_block: dict[int, list[int]] = {b: [] for b in self.block_of.values()}
        for j, b in self.block_vars:
            per_block[b].append(j)
        for sid in self.scenarios:
            b = self.block_of[sid]
            for k in inst.wt_ids:
                per_block[b].append(self.impact[(sid, k)])
                per_block[b].append(self.offline[(sid, k)])
            if sid != NORMAL_SCENARIO:
                for c in inst.cables:
                    per_block[b].append(self.connect[(sid, c.index)])
        blocks = [
            np.asarray(sorted(per_block[self.block_of[sid]]), dtype=np.int64)
            for sid in self.scenarios
        ]
        trigger = list(self.install.values())
        trigger += list(self.install_type.values())
        trigger += [
            self.connect[(NORMAL_SCENARIO, c.index)] for c in inst.cables
        ]
        trigger += list(self.member_impact.values())

        connect_no = {
            c.index: self.connect[(NORMAL_SCENARIO, c.index)] for c in inst.cables
        }
        install = dict(self.install)
        install_type = dict(self.install_type)
        wt_feeder = dict(self.wt_feeder)
        cable_feeder = dict(self.cable_feeder)
        member_impact = dict(self.member_impact)

        def completer(x: np.ndarray) -> dict[int, float] | None:
            energized = tuple(
                sorted(e for e, j in connect_no.items() if x[j] > 0.5)
            )
            oriented = _orient_forest(inst, energized)
            if oriented is None:
                return None
            _, feeder_of_node, feeder_of_cable = oriented
            on = set(energized)
            out: dict[int, float] = {}
            for j in install.values():
                out[j] = float(round(x[j]))
            for j in install_type.values():
                out[j] = float(round(x[j]))
            for e, j in connect_no.items():
                out[j] = float(e in on)
            for (fid, c), j in cable_feeder.items():
                out[j] = float(feeder_of_cable.get(c) == fid)
            for (fid, k), j in wt_feeder.items():
                out[j] = float(feeder_of_node.get(k) == fid)
            for j in member_impact.values():
                out[j] = float(round(x[j]))
            return out

        oss = set(inst.oss_ids)
        usable = [c.index for c in inst.cables if not (c.i in oss and c.j in oss)]
        crossing = inst.crossing
        n_wt = len(inst.wt_ids)
        n_nodes = len(inst.nodes)
        types = inst.options.cable_types
        best_type = -1
        if types:
            best_type = max(
                range(len(types)),
                key=lambda v: (types[v].capacity, -types[v].cost_per_km),
            )

        def rounder(x: np.ndarray) -> np.ndarray | None:
            """Greedily energize the relaxation's favorite operable forest.

            Cables join in order of their no-fault connection value; the
            usual forest rules apply (no cycles, one substation per
            component, no crossings).  Installs follow the forest, types
            take the strongest option, and the member-impact flags assume
            every feeder mate of a failed member is switched, which is
            always row-feasible even if not always the cheapest choice.
            """
            order = sorted(usable, key=lambda e: (-x[connect_no[e]], e))
            par = list(range(n_nodes))

            def find(u: int) -> int:
                while par[u] != u:
                    par[u] = par[par[u]]
                    u = par[u]
                return u

            has_oss = [int(i in oss) for i in range(n_nodes)]
            chosen: set[int] = set()
            for e in order:
                if len(chosen) == n_wt:
                    break
                c = inst.cables[e]
                if any(
                    (a == e and b in chosen) or (b == e and a in chosen)
                    for a, b in crossing
                ):
                    continue
                ri, rj = find(c.i), find(c.j)
                if ri == rj or has_oss[ri] + has_oss[rj] > 1:
                    continue
                par[ri] = rj
                has_oss[rj] += has_oss[ri]
                chosen.add(e)
            if len(chosen) != n_wt:
                return None
            oriented = _orient_forest(inst, tuple(sorted(chosen)))
            if oriented is None:
                return None
            _, feeder_of_node, feeder_of_cable = oriented
            out = x.copy()
            for e, j in connect_no.items():
                out[j] = float(e in chosen)
            for e, j in install.items():
                out[j] = float(e in chosen)
            for (e, v), j in install_type.items():
                out[j] = float(e in chosen and v == best_type)
            for (k, cc), j in member_impact.items():
                fid = feeder_of_cable.get(cc)
                out[j] = float(fid is not None and feeder_of_node.get(k) == fid)
            return out

        return Decomposition(
            blocks=blocks,
            trigger=np.asarray(sorted(set(trigger)), dtype=np.int64),
            completer=completer,
            rounder=rounder,
        )

    def build(self) -> MilpModelHandle:
        inst = self.inst
        self.first_stage()
        self.affiliation_vars()
        for sid in self.scenarios:
            self.scenario_binaries(sid)
        if inst.options.multi_fault_sets:
            self.member_impact_rows()
        self.affiliation_rows()
        for sid in self.scenarios:
            if sid != NORMAL_SCENARIO:
                self.impact_rows(sid)
            self.reconfiguration_rows(sid)
        self.structure_rows()
        for sid in self.scenarios:
            self.scenario_continuous(sid)
            self.flow_rows(sid)
        lp = self.lp.build()
        var_block = np.full(lp.n_cols, -1, dtype=np.int64)
        for j, b in self.block_vars:
            var_block[j] = b
        self.bound_tags = {
            "eq7": "slack-bus angles eliminated (no angle variable at substations)",
            "eq9": "cable flow variable bounds"
            + (" (widened; ct42 rows carry type capacities)" if self.types else ""),
            "eq11": "feeder flow variable upper bounds",
            "eq19" if not inst.options.multi_fault_sets else "mf40":
                "failed-cable connection variables fixed to 0",
            "eq25": "no-fault m/n variables fixed to 0",
            "eq26": "crossing pairs precomputed into the instance",
        }
        return MilpModelHandle(
            problem=MilpProblem(
                lp=lp,
                binary=np.asarray(self.binary, dtype=np.int64),
                var_names=lp.var_names,
                priority=np.asarray(self.bin_priority, dtype=np.int64),
                decomposition=self.decomposition(),
            ),
            var_block=var_block,
            instance=inst,
            scenario_ids=self.scenarios,
            scenario_prob=dict(self.prob),
            wind_subset=self.wind_subset,
            install=self.install,
            install_type=self.install_type,
            connect=self.connect,
            impact=self.impact,
            offline=self.offline,
            member_impact=self.member_impact,
            wt_feeder=self.wt_feeder,
            cable_feeder=self.cable_feeder,
            flow=self.flow,
            angle=self.angle,
            output=self.output,
            feeder_flow=self.feeder_flow,
            row_tags=self.tags,
            bound_tags=self.bound_tags,
            big_m=self.big_m,
        )


def _check_wind_subset(
    inst: PlanningInstance, wind_subset: Sequence[int] | None
) -> tuple[int, ...]:
    if wind_subset is None:
        return tuple(range(len(inst.wind)))
    subset = tuple(wind_subset)
    if not subset:
        raise ModelError("wind subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ModelError("wind subset contains duplicates")
    for w in subset:
        if not 0 <= w < len(inst.wind):
            raise ModelError(f"unknown wind scenario index {w}")
    return subset


def build_extensive_model(
    inst: PlanningInstance, wind_subset: Sequence[int] | None = None
) -> MilpModelHandle:
    """Full model: one second-stage block per operating state."""
    if not inst.feeders:
        raise ModelError("instance has no feeders (no candidate cable touches an OSS)")
    return _Builder(
        inst, inst.scenario_ids(), _check_wind_subset(inst, wind_subset)
    ).build()


def build_simplified_model(
    inst: PlanningInstance,
    reduced: Sequence[str],
    wind_subset: Sequence[int] | None = None,
) -> MilpModelHandle:
    """Model over a scenario subset; excluded fault mass counts as no-fault."""
    if not inst.feeders:
        raise ModelError("instance has no feeders (no candidate cable touches an OSS)")
    all_ids = set(inst.scenario_ids())
    ordered = [NORMAL_SCENARIO]
    seen = {NORMAL_SCENARIO}
    for sid in sorted(set(reduced), key=_scenario_sort_key):
        if sid not in all_ids:
            raise ModelError(f"scenario {sid!r} is not part of this instance")
        if sid not in seen:
            ordered.append(sid)
            seen.add(sid)
    return _Builder(inst, ordered, _check_wind_subset(inst, wind_subset)).build()


def _scenario_sort_key(sid: str) -> tuple[int, int]:
    if sid == NORMAL_SCENARIO:
        return (0, 0)
    return (1, int(sid[1:]))


def install_hint(handle: MilpModelHandle) -> dict[int, float]:
    """Partial assignment of install variables biased toward feasibility.

    Installing cables only relaxes the operating states, so the hint takes
    every candidate and resolves each crossing pair by dropping the longer
    member.  Under the radial restriction installed cables are forced
    energized, so the hint is instead a short spanning forest that keeps
    substations in separate components.  With a type catalogue each hinted
    cable carries its largest-capacity type.  The result feeds the partial
    warm start of ``solve_milp``.
    """
    inst = handle.instance
    oss = set(inst.oss_ids)
    installed = {c.index: True for c in inst.cables}
    if inst.options.radial_restriction:
        installed = {c.index: False for c in inst.cables}
        parent = list(range(len(inst.nodes)))
        has_oss = [int(i in oss) for i in range(len(inst.nodes))]

        def find(u: int) -> int:
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            return u

        blocked: set[int] = set()
        for c in sorted(inst.cables, key=lambda c: (c.length, c.index)):
            if c.index in blocked or (c.i in oss and c.j in oss):
                continue
            ri, rj = find(c.i), find(c.j)
            if ri == rj or has_oss[ri] + has_oss[rj] > 1:
                continue
            parent[ri] = rj
            has_oss[rj] = has_oss[ri] + has_oss[rj]
            installed[c.index] = True
            for a, b in inst.crossing:
                if a == c.index:
                    blocked.add(b)
                elif b == c.index:
                    blocked.add(a)
    else:
        for a, b in sorted(inst.crossing):
            if installed[a] and installed[b]:
                drop = a if inst.cables[a].length >= inst.cables[b].length else b
                installed[drop] = False
    fixes = {
        handle.install[c.index]: float(installed[c.index]) for c in inst.cables
    }
    types = inst.options.cable_types
    if types:
        best = max(
            range(len(types)),
            key=lambda v: (types[v].capacity, -types[v].cost_per_km),
        )
        for c in inst.cables:
            for v in range(len(types)):
                fixes[handle.install_type[(c.index, v)]] = float(
                    installed[c.index] and v == best
                )
    return fixes


def _effective_capacity(inst: PlanningInstance) -> dict[int, float]:
    """Throughput ceiling per cable: type menu wins over the cable rating,
    and feeder limits apply on the rooted cable."""
    types = inst.options.cable_types
    max_type_cap = max((t.capacity for t in types), default=0.0)
    feeder_cap: dict[int, float] = {}
    for f in inst.feeders:
        feeder_cap[f.root_cable] = min(feeder_cap.get(f.root_cable, _INF), f.capacity)
    return {
        c.index: min(
            max_type_cap if types else c.capacity,
            feeder_cap.get(c.index, _INF),
        )
        for c in inst.cables
    }


def _orient_forest(
    inst: PlanningInstance, edges: Sequence[int]
) -> tuple[dict[int, tuple[int, int]], dict[int, int], dict[int, int]] | None:
    """Root a forest at the substations.

    Returns ``(parent, feeder_of_node, feeder_of_cable)`` with
    ``parent[node] = (parent node, cable index)``, or None when the edge
    set is not a spanning forest serving every turbine with exactly one
    substation per component within the operating limits.
    """
    oss = set(inst.oss_ids)
    eff = _effective_capacity(inst)
    rc_fid = {f.root_cable: f.fid for f in inst.feeders}
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in edges:
        c = inst.cables[e]
        if c.i in oss and c.j in oss:
            return None
        adj.setdefault(c.i, []).append((c.j, e))
        adj.setdefault(c.j, []).append((c.i, e))
    parent: dict[int, tuple[int, int]] = {}
    feeder_of_node: dict[int, int] = {}
    feeder_of_cable: dict[int, int] = {}
    seen: set[int] = set()
    used = 0
    for o in sorted(oss):
        if o in seen:
            return None
        seen.add(o)
        queue = [o]
        order: list[int] = []
        while queue:
            u = queue.pop()
            for v, e in adj.get(u, ()):  # noqa: B905 - pairs
                if e in feeder_of_cable or (u != o and e == parent[u][1]):
                    continue
                if v in seen:
                    return None  # cycle or second substation reached
                seen.add(v)
                parent[v] = (u, e)
                fid = rc_fid[e] if u == o else feeder_of_node[u]
                feeder_of_node[v] = fid
                feeder_of_cable[e] = fid
                used += 1
                order.append(v)
                queue.append(v)
        # operating limits along this tree: subtree loads leaves-first,
        # then angles root-down using the final edge flows
        wts = set(inst.wt_ids)
        load = {v: inst.node(v).rated_mw if v in wts else 0.0 for v in order}
        for v in reversed(order):
            u, e = parent[v]
            if u != o:
                load[u] += load[v]
        theta = {o: 0.0}
        for v in order:
            u, e = parent[v]
            if load[v] > eff[e] + 1e-9:
                return None
            theta[v] = theta[u] + load[v] / max(
                inst.cables[e].susceptance, 1e-12
            )
            if abs(theta[v]) > inst.options.theta_max + 1e-9:
                return None
    if used != len(edges):
        return None  # leftover edges form substation-free components
    if any(k not in seen for k in inst.wt_ids):
        return None
    return parent, feeder_of_node, feeder_of_cable


def _normal_forest(inst: PlanningInstance) -> tuple[int, ...] | None:
    """Cheapest operable spanning forest over the candidate cables.

    Exhaustive over edge subsets of size ``|WT|`` at desk scale (every
    served forest has exactly that many energized cables); falls back to
    a greedy merge for larger farms and may then return None even when a
    forest exists - callers treat the result as a hint only.
    """
    oss = set(inst.oss_ids)
    usable = [c.index for c in inst.cables if not (c.i in oss and c.j in oss)]
    n_wt = len(inst.wt_ids)
    types = inst.options.cable_types
    if types:
        best = max(range(len(types)),
                   key=lambda v: (types[v].capacity, -types[v].cost_per_km))
        inv = {e: types[best].cost_per_km * inst.cables[e].length for e in usable}
    else:
        inv = {e: inst.cable_investment(e) for e in usable}
    crossing = inst.crossing
    if n_wt <= 12 and len(usable) <= 24:
        ranked = sorted(
            combinations(usable, n_wt), key=lambda sub: sum(inv[e] for e in sub)
        )
        for sub in ranked:
            chosen = set(sub)
            if any(a in chosen and b in chosen for a, b in crossing):
                continue
            if _orient_forest(inst, sub) is not None:
                return tuple(sub)
        return None
    # greedy: cheapest edges first, never joining two substations
    parent = list(range(len(inst.nodes)))

    def find(u: int) -> int:
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    has_oss = [int(i in oss) for i in range(len(inst.nodes))]
    chosen: set[int] = set()
    for e in sorted(usable, key=lambda e: (inv[e], e)):
        c = inst.cables[e]
        if any((a == e and b in chosen) or (b == e and a in chosen)
               for a, b in crossing):
            continue
        ri, rj = find(c.i), find(c.j)
        if ri == rj or has_oss[ri] + has_oss[rj] > 1:
            continue
        parent[ri] = rj
        has_oss[rj] += has_oss[ri]
        chosen.add(e)
    sub = tuple(sorted(chosen))
    if len(sub) == n_wt and _orient_forest(inst, sub) is not None:
        return sub
    return None


def warm_completion(handle: MilpModelHandle) -> dict[int, float] | None:
    """Full binary assignment from a feasible forest, faults unreconfigured.

    The normal state energizes a feasible spanning forest; every fault
    state simply de-energizes the subtree hanging below the failed
    cables and flags those turbines offline, with the switching flags
    covering the whole affected feeder.  Deliberately suboptimal (no
    post-fault transfers) but always consistent with the model rows, so
    it seeds the search with a verified incumbent.
    """
    inst = handle.instance
    forest = _normal_forest(inst)
    if forest is None:
        return None
    oriented = _orient_forest(inst, forest)
    if oriented is None:
        return None
    parent, feeder_of_node, feeder_of_cable = oriented
    energized = set(forest)
    wt = set(inst.wt_ids)
    feeder_wts: dict[int, set[int]] = {}
    for k in wt:
        feeder_wts.setdefault(feeder_of_node[k], set()).add(k)

    fixes: dict[int, float] = {}
    for c in inst.cables:
        fixes[handle.install[c.index]] = float(c.index in energized)
    types = inst.options.cable_types
    if types:
        best = max(range(len(types)),
                   key=lambda v: (types[v].capacity, -types[v].cost_per_km))
        for c in inst.cables:
            for v in range(len(types)):
                fixes[handle.install_type[(c.index, v)]] = float(
                    c.index in energized and v == best
                )
    for f in inst.feeders:
        for c in inst.cables:
            fixes[handle.cable_feeder[(f.fid, c.index)]] = float(
                feeder_of_cable.get(c.index) == f.fid
            )
        for k in wt:
            fixes[handle.wt_feeder[(f.fid, k)]] = float(
                feeder_of_node.get(k) == f.fid
            )
    for (k, c), j in handle.member_impact.items():
        fid = feeder_of_cable.get(c)
        fixes[j] = float(fid is not None and feeder_of_node.get(k) == fid)

    for sid in handle.scenario_ids:
        members = set(inst.fault_members(sid))
        if not members:
            for c in inst.cables:
                fixes[handle.connect[(sid, c.index)]] = float(c.index in energized)
            for k in wt:
                fixes[handle.impact[(sid, k)]] = 0.0
                fixes[handle.offline[(sid, k)]] = 0.0
            continue
        failed_energized = members & energized
        cut_nodes: set[int] = set()
        for v in parent:
            u = v
            while u in parent:
                if parent[u][1] in failed_energized:
                    cut_nodes.add(v)
                    break
                u = parent[u][0]
        drops = cut_nodes & wt
        impact = set(drops)
        for c in failed_energized:
            impact |= feeder_wts.get(feeder_of_cable[c], set())
        for c in inst.cables:
            keep = (
                c.index in energized
                and c.index not in members
                and c.index not in {pe for v, (pu, pe) in parent.items()
                                    if v in cut_nodes}
            )
            fixes[handle.connect[(sid, c.index)]] = float(keep)
        for k in wt:
            fixes[handle.impact[(sid, k)]] = float(k in impact)
            fixes[handle.offline[(sid, k)]] = float(k in drops)
    return fixes


def solve_model(
    handle: MilpModelHandle,
    gap_tol: float | None = None,
    time_limit: float | None = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    warm_start: dict[int, float] | np.ndarray | None = None,
) -> MilpResult:
    """Solve a built model, seeded with instance-derived warm starts."""
    if warm_start is None:
        warm_start = warm_completion(handle)
    return solve_milp(
        handle.problem,
        gap_tol=gap_tol,
        warm_start=warm_start,
        time_limit=time_limit,
        settings=settings,
        hint_fixes=install_hint(handle),
    )


def add_multifault_extension(
    inst: PlanningInstance, fault_sets: Sequence[MultiFaultSet]
) -> MilpModelHandle:
    """Extensive model whose fault states are the given simultaneous-fault sets."""
    patched = make_instance(
        inst.nodes,
        inst.cables,
        inst.wind,
        inst.economics,
        replace(inst.options, multi_fault_sets=tuple(fault_sets)),
        feeders=inst.feeders,
        crossing=inst.crossing,
    )
    return build_extensive_model(patched)


def add_cabletype_extension(
    inst: PlanningInstance, types: Sequence[CableType]
) -> MilpModelHandle:
    """Extensive model with per-cable type choice (cost/capacity menus)."""
    if not types:
        raise ModelError("cable type table is empty")
    patched = make_instance(
        inst.nodes,
        inst.cables,
        inst.wind,
        inst.economics,
        replace(inst.options, cable_types=tuple(types)),
        feeders=inst.feeders,
        crossing=inst.crossing,
    )
    return build_extensive_model(patched)


def add_radial_restriction(inst: PlanningInstance) -> MilpModelHandle:
    """Extensive model with every installed cable energized in normal state."""
    patched = make_instance(
        inst.nodes,
        inst.cables,
        inst.wind,
        inst.economics,
        replace(inst.options, radial_restriction=True),
        feeders=inst.feeders,
        crossing=inst.crossing,
    )
    return build_extensive_model(patched)


@dataclass
class CostBreakdown:
    investment: float
    om: float
    reliability: float

    @property
    def total(self) -> float:
        return self.investment + self.om + self.reliability


@dataclass
class LayoutSolution:
    installed: tuple[int, ...]
    installed_types: dict[int, int]
    scenario_ids: tuple[str, ...]
    connected: dict[str, tuple[int, ...]]
    affected: dict[str, tuple[int, ...]]
    offline: dict[str, tuple[int, ...]]
    feeder_wts: dict[int, tuple[int, ...]]
    feeder_cables: dict[int, tuple[int, ...]]
    flows: dict[str, dict[int, float]]
    outputs: dict[str, dict[int, float]]
    angles: dict[str, dict[int, float]]
    objective: float
    costs: CostBreakdown
    gap: float
    certified: bool


def extract_solution(
    handle: MilpModelHandle, x: np.ndarray, objective: float,
    gap: float = 0.0, certified: bool = True,
) -> LayoutSolution:
    inst = handle.instance

    def on(idx: int) -> bool:
        return x[idx] > 0.5

    installed = tuple(e for e in sorted(handle.install) if on(handle.install[e]))
    installed_types = {
        e: v for (e, v), j in sorted(handle.install_type.items()) if on(j)
    }
    connected = {}
    affected = {}
    offline = {}
    flows: dict[str, dict[int, float]] = {}
    outputs: dict[str, dict[int, float]] = {}
    angles: dict[str, dict[int, float]] = {}
    for sid in handle.scenario_ids:
        connected[sid] = tuple(
            c.index for c in inst.cables if on(handle.connect[(sid, c.index)])
        )
        affected[sid] = tuple(k for k in inst.wt_ids if on(handle.impact[(sid, k)]))
        offline[sid] = tuple(k for k in inst.wt_ids if on(handle.offline[(sid, k)]))
        flows[sid] = {
            c.index: float(x[handle.flow[(sid, c.index)]]) for c in inst.cables
        }
        outputs[sid] = {k: float(x[handle.output[(sid, k)]]) for k in inst.wt_ids}
        angles[sid] = {k: float(x[handle.angle[(sid, k)]]) for k in inst.wt_ids}
    feeder_wts = {
        f.fid: tuple(k for k in inst.wt_ids if on(handle.wt_feeder[(f.fid, k)]))
        for f in inst.feeders
    }
    feeder_cables = {
        f.fid: tuple(
            c.index for c in inst.cables if on(handle.cable_feeder[(f.fid, c.index)])
        )
        for f in inst.feeders
    }
    sol = LayoutSolution(
        installed=installed,
        installed_types=installed_types,
        scenario_ids=handle.scenario_ids,
        connected=connected,
        affected=affected,
        offline=offline,
        feeder_wts=feeder_wts,
        feeder_cables=feeder_cables,
        flows=flows,
        outputs=outputs,
        angles=angles,
        objective=float(objective),
        costs=CostBreakdown(0.0, 0.0, 0.0),
        gap=float(gap),
        certified=certified,
    )
    sol.costs = evaluate_solution_cost(
        inst,
        sol,
        scenario_prob=handle.scenario_prob,
        wind_subset=handle.wind_subset,
        validate=False,
    )
    return sol


def evaluate_solution_cost(
    inst: PlanningInstance,
    sol: LayoutSolution,
    scenario_prob: dict[str, float] | None = None,
    wind_subset: Sequence[int] | None = None,
    validate: bool = True,
) -> CostBreakdown:
    """Recompute the cost breakdown from the solution's flags alone.

    Independent of any solver objective value; with ``validate`` the
    structural identities are checked first and violations raise with the
    constraint-family tag.
    """
    if validate:
        _validate_solution(inst, sol)
    subset = _check_wind_subset(inst, wind_subset)
    econ = inst.economics
    if sol.installed_types:
        types = inst.options.cable_types
        invest = sum(
            types[v].cost_per_km * inst.cables[e].length
            for e, v in sol.installed_types.items()
        )
    else:
        invest = sum(inst.cable_investment(e) for e in sol.installed)
    om = econ.om_fraction * annuity_factor(econ.discount_rate, econ.lifetime_years) * invest
    rel = 0.0
    for sid in sol.scenario_ids:
        if sid == NORMAL_SCENARIO:
            continue
        xi = (
            scenario_prob[sid]
            if scenario_prob is not None
            else inst.fault_probability(sid)
        )
        member = inst.cables[inst.fault_members(sid)[0]].reliability
        srel = _synthetic_reliability(xi, member.tau_sw, member.tau_rp)
        for k in inst.wt_ids:
            cm = cn = 0.0
            for w in subset:
                a, b = curtailment_cost_coefficient(
                    inst.node(k).rated_mw, inst.wind[w], srel, econ
                )
                cm += a
                cn += b
            if k in sol.affected[sid]:
                rel += cm
            if k in sol.offline[sid]:
                rel += cn
    return CostBreakdown(investment=invest, om=om, reliability=rel)


def _validate_solution(inst: PlanningInstance, sol: LayoutSolution) -> None:
    installed = set(sol.installed)
    for e1, e2 in inst.crossing:
        if e1 in installed and e2 in installed:
            raise ModelError(f"eq27 violated: crossing cables {e1} and {e2} both installed")
    n_wt = len(inst.wt_ids)
    for sid in sol.scenario_ids:
        conn = set(sol.connected[sid])
        if not conn <= installed:
            raise ModelError(f"eq20 violated in scenario {sid}: connected cable not installed")
        off = set(sol.offline[sid])
        if len(conn) != n_wt - len(off):
            raise ModelError(f"eq23 violated in scenario {sid}: {len(conn)} cables vs {n_wt - len(off)} served turbines")
        if sid == NORMAL_SCENARIO:
            if sol.affected[sid] or sol.offline[sid]:
                raise ModelError("eq25 violated: curtailment flags set in the no-fault state")
            continue
        if not off <= set(sol.affected[sid]):
            raise ModelError(f"eq21 violated in scenario {sid}: offline turbine not in the affected set")
        for c in inst.fault_members(sid):
            if c in conn:
                raise ModelError(f"eq19 violated in scenario {sid}: failed cable {c} connected")
    for sid, per_cable in sol.flows.items():
        for e, p in per_cable.items():
            cap = (
                inst.options.cable_types[sol.installed_types[e]].capacity
                if sol.installed_types and e in sol.installed_types
                else inst.cables[e].capacity
            )
            if abs(p) > cap + 1e-6:
                raise ModelError(f"eq9 violated in scenario {sid}: cable {e} carries {p}")
        for f in inst.feeders:
            root = inst.cables[f.root_cable]
            sigma = 1.0 if root.j == f.oss else -1.0
            if sigma * per_cable.get(f.root_cable, 0.0) > f.capacity + 1e-6:
                raise ModelError(f"eq11 violated in scenario {sid}: feeder {f.fid} over capacity")
