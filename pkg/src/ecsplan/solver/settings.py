"""Central tolerance and rule settings shared by the LP/MILP/Benders engines."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SolverSettings:
    """All numeric tolerances and deterministic rule thresholds in one place.

    ``feas_tol``/``opt_tol`` drive the simplex (primal feasibility and
    reduced-cost optimality), ``int_tol`` decides when a relaxation value
    counts as integral, ``pivot_tol`` rejects unstable pivots.  Bland's
    anti-cycling rule engages after ``bland_after`` consecutive degenerate
    iterations.  The basis is refactorized every ``refactor_every`` pivots.
    """

    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    int_tol: float = 1e-6
    pivot_tol: float = 1e-9
    bland_after: int = 100
    refactor_every: int = 64
    max_lp_iters: int = 200_000
    max_nodes: int = 2_000_000
    milp_gap_tol: float = 1e-9
    dive_rounds: int = 400
    dive_retry_nodes: int = 200
    probe_limit: int = 0
    benders_max_iters: int = 1000


DEFAULT_SETTINGS = SolverSettings()
