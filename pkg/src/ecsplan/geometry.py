"""Plane geometry for collector-system layout planning.

Coordinates are kilometres in an arbitrary planar frame.  The module
provides segment-crossing tests used to forbid overlapping cable routes,
k-nearest-neighbour candidate generation, and the two-substation farm
partition that splits a wind farm into three independently solvable
regions by sweeping a pair of parallel boundary lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

ALPHA_MAX_DEFAULT = math.pi / 2
ALPHA_STEP_DEFAULT = math.pi / 180


class Point(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point
    b: Point


@dataclass(frozen=True)
class PartitionResult:
    """Outcome of the two-substation partition sweep.

    ``regions`` holds one tuple of wind-turbine indices per region (indices
    into the ``wt_nodes`` argument).  ``region_oss`` gives, per region, the
    indices into ``oss_nodes`` of the substations that region may connect
    to.  For single-substation farms ``partitioned`` is False and there is
    a single region containing every turbine.  ``alpha_star`` is the chosen
    boundary rotation in radians and ``u_alpha`` the largest pairwise
    difference between region turbine counts at that angle.
    """

    partitioned: bool
    regions: tuple[tuple[int, ...], ...]
    region_oss: tuple[tuple[int, ...], ...]
    alpha_star: float | None = None
    u_alpha: int | None = None


def _dist(p: Point, q: Point) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def euclidean_length(s: Segment) -> float:
    """Straight-line length of a segment; degenerate segments are rejected."""
    d = _dist(s[0], s[1])
    if d == 0.0:
        raise ValueError("degenerate segment: endpoints coincide")
    return d


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def segments_cross(s1: Segment, s2: Segment) -> bool:
    """True when the two segments cross at a single interior point.

    Shared endpoints, mere touching (an endpoint lying on the other
    segment) and collinear overlap all count as non-crossing; only a
    strict transversal intersection of the interiors returns True.
    """
    (p1, q1), (p2, q2) = s1, s2
    r_x, r_y = q1[0] - p1[0], q1[1] - p1[1]
    s_x, s_y = q2[0] - p2[0], q2[1] - p2[1]
    d1 = _cross(s_x, s_y, p1[0] - p2[0], p1[1] - p2[1])
    d2 = _cross(s_x, s_y, q1[0] - p2[0], q1[1] - p2[1])
    d3 = _cross(r_x, r_y, p2[0] - p1[0], p2[1] - p1[1])
    d4 = _cross(r_x, r_y, q2[0] - p1[0], q2[1] - p1[1])
    # Strict sign changes on both segments; any zero means an endpoint on
    # the other line (touching) or collinearity, which is not a crossing.
    return d1 * d2 < 0.0 and d3 * d4 < 0.0


def crossing_pairs(cables: Sequence[Segment]) -> set[tuple[int, int]]:
    """All index pairs (i, j), i < j, whose segments cross each other."""
    out: set[tuple[int, int]] = set()
    for i in range(len(cables)):
        for j in range(i + 1, len(cables)):
            if segments_cross(cables[i], cables[j]):
                out.add((i, j))
    return out


def knn_candidates(nodes: Sequence[Point], k: int) -> set[tuple[int, int]]:
    """Undirected k-nearest-neighbour edges over a point set.

    Each node contributes edges to its ``k`` nearest other nodes; distance
    ties are broken toward the lower node index.  The union is returned as
    a set of (i, j) index pairs with i < j.
    """
    n = len(nodes)
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= n:
        raise ValueError("k must be smaller than the node count")
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        ranked = sorted(
            (j for j in range(n) if j != i),
            key=lambda j: (_dist(nodes[i], nodes[j]), j),
        )
        for j in ranked[:k]:
            pairs.add((min(i, j), max(i, j)))
    return pairs


def _region_of(wt: Point, o1: Point, o2: Point, d_x: float, d_y: float) -> int:
    """Region index 0/1/2 of a turbine for boundary direction (d_x, d_y)."""
    c1 = _cross(d_x, d_y, wt[0] - o1[0], wt[1] - o1[1])
    c2 = _cross(d_x, d_y, wt[0] - o2[0], wt[1] - o2[1])
    # Substation O2 lies on the non-positive side of the boundary through
    # O1 (and vice versa), so region 0 is the far side of O1, region 2 the
    # far side of O2 and region 1 the strip between the two boundaries.
    # Turbines exactly on a boundary go to the outer region.
    if c1 >= 0.0 and c2 >= 0.0:
        return 0
    if c1 <= 0.0 and c2 <= 0.0:
        return 2
    return 1


def partition_owf(
    wt_nodes: Sequence[Point],
    oss_nodes: Sequence[Point],
    alpha_max: float = ALPHA_MAX_DEFAULT,
    alpha_step: float = ALPHA_STEP_DEFAULT,
) -> PartitionResult:
    """Split a farm into regions balanced by turbine count.

    With two substations, a pair of parallel boundary lines through the
    substations is rotated from 0 to ``alpha_max`` radians (relative to the
    substation axis) in steps of ``alpha_step``; the first angle minimising
    the largest pairwise difference between region turbine counts wins.  A
    single substation yields one region and no partition; more than two
    substations are not supported.
    """
    if alpha_step <= 0.0:
        raise ValueError("alpha_step must be positive")
    n_oss = len(oss_nodes)
    all_wt = tuple(range(len(wt_nodes)))
    if n_oss == 1:
        return PartitionResult(False, (all_wt,), ((0,),))
    if n_oss != 2:
        raise ValueError("partition is defined for one or two substations")

    o1, o2 = oss_nodes[0], oss_nodes[1]
    base = _dist(o1, o2)
    if base == 0.0:
        raise ValueError("substations coincide")
    u_x, u_y = (o2[0] - o1[0]) / base, (o2[1] - o1[1]) / base

    best_alpha = None
    best_spread = None
    best_regions = None
    steps = int(math.floor(alpha_max / alpha_step + 1e-9))
    for step in range(steps + 1):
        alpha = min(step * alpha_step, alpha_max)
        d_x = u_x * math.cos(alpha) - u_y * math.sin(alpha)
        d_y = u_x * math.sin(alpha) + u_y * math.cos(alpha)
        regions: tuple[list[int], list[int], list[int]] = ([], [], [])
        for idx, wt in enumerate(wt_nodes):
            regions[_region_of(wt, o1, o2, d_x, d_y)].append(idx)
        counts = [len(r) for r in regions]
        spread = max(counts) - min(counts)
        if best_spread is None or spread < best_spread:
            best_spread = spread
            best_alpha = alpha
            best_regions = tuple(tuple(r) for r in regions)
        if best_spread == 0:
            break
    assert best_regions is not None
    return PartitionResult(
        True,
        best_regions,
        ((0,), (0, 1), (1,)),
        alpha_star=best_alpha,
        u_alpha=best_spread,
    )
