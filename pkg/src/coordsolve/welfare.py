"""Welfare: gross benefit, consumer surplus, the planner's problem, the
network-externality wedge, the high-vs-low decomposition and welfare
orderings, plus welfare under a constant-marginal-cost leader.

Welfare at supply S assumes the cheapest S sites are built, which holds at
every equilibrium of the baseline game and at the planner's optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost_stock import CostDistribution
from .demand import DemandModel
from .equilibrium import EquilibriumStructure, Regime
from .errors import DomainError, OrderingViolation
from .leader import BOUNDARY_TOL, LeaderSolution
from .numerics import adaptive_simpson, bisect, grid_then_golden

FOC_TOL = 1e-6
ORDER_TOL = 1e-9


@dataclass(frozen=True)
class PlannerSolution:
    s_fb: float
    welfare: float
    boundary_hit: bool
    foc_residual: float | None
    single_peaked: bool


@dataclass(frozen=True)
class Decomposition:
    term_a: float
    term_b: float
    term_c: float
    welfare_gain: float

    @property
    def residual(self) -> float:
        return self.term_a - self.term_c + self.term_b - self.welfare_gain


def _check_supply(s: float) -> None:
    if s < 0.0:
        raise DomainError(f"supply {s!r} must be >= 0")


def gross_benefit(demand: DemandModel, s: float, method: str = "auto") -> float:
    """B(S): area under P(., S) from 0 to S.

    ``method`` is "closed" (family closed form), "quadrature" (adaptive
    Simpson on the price itself) or "auto" (closed form when the family has one).
    """
    _check_supply(s)
    if method == "closed" or (method == "auto" and demand.has_closed_forms):
        return float(demand.price_integral(0.0, s, s))
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    return adaptive_simpson(lambda q: float(demand.price(q, s)), 0.0, s)


def welfare(demand: DemandModel, cost: CostDistribution, s: float) -> float:
    return gross_benefit(demand, s) - cost.cumulative_cost(s)


def consumer_surplus(demand: DemandModel, s: float, method: str = "auto") -> float:
    return gross_benefit(demand, s, method) - float(demand.price(s, s)) * s


def externality_gap(demand: DemandModel, s: float, method: str = "auto") -> float:
    """Integral over existing consumers of dP/dS: the benefit a marginal unit
    confers on everyone already housed, which no entrant can charge for."""
    _check_supply(s)
    if method == "closed" or (method == "auto" and demand.has_closed_forms):
        return float(demand.externality_integral(s))
    if method not in ("auto", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    return adaptive_simpson(lambda q: float(demand.dprice_ds(q, s)), 0.0, s)


def marginal_welfare(demand: DemandModel, cost: CostDistribution, s: float) -> float:
    """dW/dS = P(S,S) + externality gap - G^-1(S)."""
    return float(demand.price(s, s)) + externality_gap(demand, s) - float(cost.quantile(s))


def planner_solve(
    demand: DemandModel, cost: CostDistribution, n_grid: int = 10_000, tol: float = 1e-12
) -> PlannerSolution:
    """Global welfare maximum on [0, 1].

    Grid scan plus golden refinement. An interior optimum is then polished
    by bisection on the sign of marginal welfare so the first-order residual
    is small. Whether the grid shows a single peak is reported, not assumed.
    """
    def w(x: float) -> float:
        return welfare(demand, cost, x)

    x, wx = grid_then_golden(w, 0.0, 1.0, n_grid, tol)
    w1 = w(1.0)
    if 1.0 - x <= BOUNDARY_TOL or w1 >= wx:
        x, wx = 1.0, w1

    boundary = x >= 1.0 - BOUNDARY_TOL
    residual = None
    if not boundary and x > 0.0:
        h = 1.0 / (n_grid - 1)
        a, b = max(x - h, 1e-12), min(x + h, 1.0 - 1e-12)
        mw_a, mw_b = marginal_welfare(demand, cost, a), marginal_welfare(demand, cost, b)
        if mw_a > 0.0 > mw_b:
            root = bisect(lambda t: marginal_welfare(demand, cost, t), a, b, 1e-14)
            w_root = w(root)
            if w_root >= wx - 1e-13:
                x, wx = root, w_root
        residual = marginal_welfare(demand, cost, x)

    grid = np.linspace(0.0, 1.0, 2001)
    vals = np.array([w(float(g)) for g in grid])
    d = np.diff(vals)
    # single peak: increments change sign at most once, from + to -
    signs = np.sign(d[np.abs(d) > 1e-15])
    single = bool(np.all(np.diff(signs) <= 0))
    return PlannerSolution(x, wx, boundary, residual, single)


def decompose(demand: DemandModel, cost: CostDistribution, structure: EquilibriumStructure) -> Decomposition:
    """Split W(S_high) - W(S_low) into new-unit benefit (A), network uplift
    for existing consumers (B) and the cost of the extra sites (C)."""
    lo, hi = structure.low, structure.high
    if demand.has_closed_forms:
        term_a = float(demand.price_integral(lo, hi, hi))
        term_b = float(demand.price_integral(0.0, lo, hi) - demand.price_integral(0.0, lo, lo))
    else:
        term_a = adaptive_simpson(lambda q: float(demand.price(q, hi)), lo, hi)
        term_b = adaptive_simpson(lambda q: float(demand.price(q, hi) - demand.price(q, lo)), 0.0, lo)
    term_c = cost.cumulative_cost(hi) - cost.cumulative_cost(lo)
    gain = welfare(demand, cost, hi) - welfare(demand, cost, lo)
    return Decomposition(term_a, term_b, term_c, gain)


@dataclass(frozen=True)
class OrderingRow:
    label: str
    supply: float
    welfare: float


@dataclass(frozen=True)
class OrderingReport:
    rows: tuple[OrderingRow, ...]
    high_vs_low_strict: bool
    leader_vs_high_strict: bool
    planner_vs_leader_strict: bool
    boundary_coincidence: bool


def ordering_report(
    demand: DemandModel,
    cost: CostDistribution,
    structure: EquilibriumStructure,
    leader_solution: LeaderSolution,
    planner_solution: PlannerSolution,
    tol: float = ORDER_TOL,
) -> OrderingReport:
    """Check W(S_low) < W(S_high) <= W(leader outcome) <= W(S_fb)."""
    rows = (
        OrderingRow("low", structure.low, welfare(demand, cost, structure.low)),
        OrderingRow("high", structure.high, welfare(demand, cost, structure.high)),
        OrderingRow("leader", leader_solution.total_supply, welfare(demand, cost, leader_solution.total_supply)),
        OrderingRow("planner", planner_solution.s_fb, planner_solution.welfare),
    )
    return check_ordering(rows, leader_solution, planner_solution, tol)


def check_ordering(
    rows: tuple[OrderingRow, ...],
    leader_solution: LeaderSolution,
    planner_solution: PlannerSolution,
    tol: float = ORDER_TOL,
) -> OrderingReport:
    w_low, w_high, w_lead, w_fb = (r.welfare for r in rows)
    if not w_low < w_high:
        raise OrderingViolation(f"W(S_low)={w_low!r} is not below W(S_high)={w_high!r}")
    if w_lead < w_high - tol:
        raise OrderingViolation(f"leader welfare {w_lead!r} below W(S_high)={w_high!r}")
    if w_fb < w_lead - tol:
        raise OrderingViolation(f"planner welfare {w_fb!r} below leader welfare {w_lead!r}")
    entered_iii = leader_solution.regime is Regime.III
    gap = planner_solution.s_fb - leader_solution.s_l_star
    return OrderingReport(
        rows,
        True,
        entered_iii and w_lead > w_high,
        gap > BOUNDARY_TOL and w_fb > w_lead + tol,
        leader_solution.boundary_hit and planner_solution.boundary_hit,
    )


@dataclass(frozen=True)
class AltWelfare:
    welfare: float
    leader_cost: float
    displaced_fringe_cost: float | None
    leader_more_efficient: bool | None


def alt_welfare(demand: DemandModel, cost: CostDistribution, s_l: float, s: float, c_l: float) -> AltWelfare:
    """Welfare when the leader builds at constant unit cost ``c_l`` off-stock
    and the fringe builds the cheapest s - s_l sites.

    ``leader_more_efficient`` compares the leader's outlay with the cost of
    the fringe units it displaces at the same total supply.
    """
    if not (0.0 <= s_l <= s):
        raise DomainError(f"need 0 <= s_l <= s, got s_l={s_l!r}, s={s!r}")
    fringe = s - s_l
    if not (0.0 <= fringe <= 1.0):
        raise DomainError(f"fringe supply {fringe!r} outside [0, 1]")
    leader_cost = c_l * s_l
    value = gross_benefit(demand, s) - leader_cost - cost.cumulative_cost(fringe)
    if s > 1.0:
        # no all-fringe allocation reaches s, so there is nothing to compare against
        return AltWelfare(value, leader_cost, None, None)
    displaced = cost.cumulative_cost(s) - cost.cumulative_cost(fringe)
    return AltWelfare(value, leader_cost, displaced, leader_cost < displaced)
