"""Stochastic and economic parameterization.

Wind scenarios are exogenous (probability, per-unit output) pairs.  Cable
outages follow a two-state Markov chain with failure rate lambda and
repair rate mu, giving steady-state unavailability lambda/(lambda+mu).
Costs are split into investment, O&M (a fixed fraction of investment,
annualized) and expected curtailment cost over the project lifetime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

PROB_TOL = 1e-9


@dataclass(frozen=True)
class WindScenario:
    """One wind operating point: occurrence probability and output factor."""

    probability: float
    magnitude: float

    def __post_init__(self) -> None:
        if not 0.0 < self.probability <= 1.0:
            raise ValueError("wind scenario probability must be in (0, 1]")
        if not 0.0 <= self.magnitude <= 1.0:
            raise ValueError("wind magnitude must be in [0, 1]")


@dataclass(frozen=True)
class ReliabilityParams:
    """Cable outage model: rates per year, switching/repair durations in hours."""

    failure_rate: float
    repair_rate: float
    tau_sw: float
    tau_rp: float

    def __post_init__(self) -> None:
        if self.failure_rate < 0.0:
            raise ValueError("failure_rate must be nonnegative")
        if self.repair_rate <= 0.0:
            raise ValueError("repair_rate must be positive")
        if self.tau_sw <= 0.0 or self.tau_rp <= 0.0:
            raise ValueError("switching and repair durations must be positive")


@dataclass(frozen=True)
class EconomicParams:
    """Farm-wide economic inputs.

    ``cable_cost_per_km`` is the base investment cost in $/km,
    ``electricity_price`` the curtailment valuation in $/MWh,
    ``om_fraction`` the yearly O&M cost as a fraction of investment,
    ``discount_rate`` and ``lifetime_years`` drive the annuity factor.
    """

    cable_cost_per_km: float
    electricity_price: float
    om_fraction: float
    discount_rate: float
    lifetime_years: float
    hours_per_year: float = 8760.0

    def __post_init__(self) -> None:
        if self.cable_cost_per_km < 0.0 or self.electricity_price < 0.0:
            raise ValueError("costs must be nonnegative")
        if self.om_fraction < 0.0:
            raise ValueError("om_fraction must be nonnegative")
        if self.discount_rate <= 0.0:
            raise ValueError("discount_rate must be positive")
        if self.lifetime_years < 1.0:
            raise ValueError("lifetime_years must be at least 1")
        if self.hours_per_year <= 0.0:
            raise ValueError("hours_per_year must be positive")


def validate_wind_scenarios(scenarios: Sequence[WindScenario]) -> None:
    """Check the wind set is nonempty with probabilities summing to 1."""
    if not scenarios:
        raise ValueError("at least one wind scenario is required")
    total = sum(w.probability for w in scenarios)
    if abs(total - 1.0) > PROB_TOL:
        raise ValueError(f"wind probabilities sum to {total!r}, expected 1")


def cable_unavailability(r: ReliabilityParams) -> float:
    """Steady-state probability of the cable being under repair."""
    return r.failure_rate / (r.failure_rate + r.repair_rate)


def normal_state_probability(xis: Iterable[float]) -> float:
    """Probability of the no-fault state given per-cable unavailabilities."""
    total = 0.0
    for xi in xis:
        if xi < 0.0:
            raise ValueError("unavailability must be nonnegative")
        total += xi
    if total >= 1.0:
        raise ValueError(
            "sum of cable unavailabilities reaches 1; "
            "single-fault scenario model does not apply"
        )
    return 1.0 - total


def annuity_factor(q: float, t: float) -> float:
    """Present-worth factor turning a yearly cost into a lifetime cost."""
    if q <= 0.0:
        raise ValueError("discount rate must be positive")
    if t < 1.0:
        raise ValueError("lifetime must be at least one year")
    growth = (1.0 + q) ** t
    return (growth - 1.0) / (q * growth)


def curtailment_cost_coefficient(
    rated_mw: float,
    omega: WindScenario,
    r: ReliabilityParams,
    econ: EconomicParams,
) -> tuple[float, float]:
    """Objective coefficients for one turbine's outage flags in one scenario.

    Returns the ($ per switching-period flag, $ per repair-period flag)
    pair: lifetime-discounted expected curtailment cost of the turbine
    being offline during fault isolation and during repair, respectively.
    Covers price, annuity, hours, the fault probability implied by ``r``,
    the wind weight and the switching/repair duration split.
    """
    annuity = annuity_factor(econ.discount_rate, econ.lifetime_years)
    base = (
        econ.electricity_price
        * annuity
        * econ.hours_per_year
        * cable_unavailability(r)
        * omega.probability
        * rated_mw
        * omega.magnitude
    )
    split = r.tau_sw + r.tau_rp
    return base * r.tau_sw / split, base * r.tau_rp / split
