"""Stackelberg leader: profit by regime, the whole-market profit function,
monopoly-region optimisation, dominance certificates, and the capacity and
constant-marginal-cost variants.

Deviations are always scored against every stable continuation; no
selection rule among continuations is assumed anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cost_stock import CostDistribution
from .demand import DemandModel, SpecifiedLinearNetwork
from .equilibrium import (
    DEFAULT_GRID_N,
    DEFAULT_TOL,
    EquilibriumStructure,
    FixedPoint,
    Regime,
    _scan_roots,
    correspondence,
    regime_of,
    response,
    response_slope,
)
from .errors import CertificateFailure, DomainError
from .numerics import grid_then_golden

BOUNDARY_TOL = 1e-8
# profit gaps below this are ties and resolve toward the smaller commitment
PROFIT_TIE = 1e-12


@dataclass(frozen=True)
class LeaderSolution:
    s_l_star: float
    regime: Regime
    profit: float
    total_supply: float
    boundary_hit: bool
    regime2_profit: float
    regime3_profit: float
    foc_residual: float | None = None


@dataclass(frozen=True)
class DominanceCertificate:
    deviation_grid: np.ndarray = field(repr=False)
    worst_margin: float
    worst_deviation: float
    worst_realization: float

    @property
    def valid(self) -> bool:
        return self.worst_margin > 0.0


@dataclass(frozen=True)
class Regime3Result:
    s_l_mon: float
    profit: float
    boundary_hit: bool
    foc_residual: float | None


@dataclass(frozen=True)
class ExpansionCondition:
    holds: bool
    margin: float
    index: float | None = None  # gamma*alpha*S_high^(alpha-1) for the power-law family


@dataclass(frozen=True)
class CapacitySolution:
    k: float
    s_l_star: float
    regime: Regime
    profit: float
    total_supply: float
    boundary_hit: bool
    optimistic_profit: float
    optimistic_supply: float
    binding: bool


# -- profit building blocks -------------------------------------------------


def leader_profit(demand: DemandModel, cost: CostDistribution, s_l: float, s_star: float) -> float:
    """P(S*, S*) * S_L minus the cost of the S_L cheapest sites."""
    return float(demand.price(s_star, s_star)) * s_l - cost.cumulative_cost(s_l)


def whole_market_profit(cost: CostDistribution, s: float) -> float:
    """Profit from building all of an equilibrium supply ``s`` at price G^-1(s)."""
    return float(cost.quantile(s)) * s - cost.cumulative_cost(s)


def whole_market_profit_slope(cost: CostDistribution, s: float) -> float:
    """s / g(G^-1(s)); undefined where the density jumps."""
    if not (0.0 < s < 1.0):
        raise DomainError(f"slope needs 0 < s < 1, got {s!r}")
    c = float(cost.quantile(s))
    if cost.near_knot(c):
        raise DomainError(f"quantile({s!r}) = {c!r} sits on a density discontinuity")
    return s / cost.density(c)


def regime3_profit(demand: DemandModel, cost: CostDistribution, s_l: float) -> float:
    return float(demand.price(s_l, s_l)) * s_l - cost.cumulative_cost(s_l)


def regime3_slope(demand: DemandModel, cost: CostDistribution, s_l: float) -> float:
    return (
        float(demand.price(s_l, s_l))
        + float(demand.total_slope(s_l)) * s_l
        - float(cost.quantile(s_l))
    )


# -- optimisation -----------------------------------------------------------


def solve_regime3(
    demand: DemandModel,
    cost: CostDistribution,
    structure: EquilibriumStructure,
    upper: float = 1.0,
    n_grid: int = 1000,
    tol: float = 1e-10,
) -> Regime3Result:
    """Maximise monopoly-region profit on [S_high, upper].

    A grid scan seeds golden-section refinement because piecewise-linear
    cost stocks can make the objective multi-peaked.
    """
    lo = structure.high
    if upper <= lo:
        return Regime3Result(lo, regime3_profit(demand, cost, lo), lo >= 1.0 - BOUNDARY_TOL, None)

    def f(x: float) -> float:
        return regime3_profit(demand, cost, x)

    x, fx = grid_then_golden(f, lo, upper, n_grid, tol)
    f_up = f(upper)
    if upper - x <= BOUNDARY_TOL or f_up >= fx:
        x, fx = upper, f_up
    boundary = upper >= 1.0 - BOUNDARY_TOL and x >= upper - BOUNDARY_TOL
    interior = lo < x < upper
    residual = regime3_slope(demand, cost, x) if interior else None
    return Regime3Result(x, fx, boundary, residual)


def expansion_condition(demand: DemandModel, structure: EquilibriumStructure) -> ExpansionCondition:
    """Sign of dP/dQ + dP/dS at (S_high, S_high)."""
    s_h = structure.high
    margin = float(demand.total_slope(s_h))
    index = None
    if isinstance(demand, SpecifiedLinearNetwork):
        index = demand.expansion_index(s_h)
        # beta*margin + 1 == index, so the two sign tests must agree
        if (margin > 0) != (index > 1.0) and abs(index - 1.0) > 1e-12:
            raise AssertionError(f"expansion margin {margin!r} disagrees with index {index!r}")
    return ExpansionCondition(margin > 0.0, margin, index)


def solve(
    demand: DemandModel, cost: CostDistribution, structure: EquilibriumStructure, upper: float = 1.0
) -> LeaderSolution:
    """Leader optimum: S_high (regime II) or the monopoly-region maximiser.

    The regime II value is the leader building all of S_high at the price
    P(S_high, S_high); at an interior high point that is the whole-market
    profit at S_high. Exact and near ties go to S_high.
    """
    s_h = structure.high
    pi2 = leader_profit(demand, cost, s_h, s_h)
    r3 = solve_regime3(demand, cost, structure, upper=upper)
    if r3.s_l_mon > s_h and r3.profit - pi2 > PROFIT_TIE:
        return LeaderSolution(
            r3.s_l_mon, Regime.III, r3.profit, r3.s_l_mon, r3.boundary_hit, pi2, r3.profit, r3.foc_residual
        )
    return LeaderSolution(
        s_h, Regime.II, pi2, s_h, s_h >= 1.0 - BOUNDARY_TOL, pi2, r3.profit, None
    )


def deviation_profits(
    demand: DemandModel, cost: CostDistribution, structure: EquilibriumStructure, s_l: float
) -> list[tuple[float, float]]:
    """(realised supply, leader profit) for every stable continuation of ``s_l``."""
    corr = correspondence(structure, demand, cost, s_l)
    return [(o.supply, leader_profit(demand, cost, s_l, o.supply)) for o in corr.outcomes]


def verify_dominance(
    demand: DemandModel,
    cost: CostDistribution,
    structure: EquilibriumStructure,
    solution: LeaderSolution,
    grid_n: int = 500,
) -> DominanceCertificate:
    """Enumerate deviations on [0, S_unstable) under every continuation.

    Raises CertificateFailure at the worst deviation if it is not strictly
    beaten by the solution.
    """
    grid = np.linspace(0.0, structure.unstable, grid_n, endpoint=False)
    worst = (np.inf, 0.0, 0.0)
    for s_l in grid:
        for supply, prof in deviation_profits(demand, cost, structure, float(s_l)):
            margin = solution.profit - prof
            if margin < worst[0]:
                worst = (margin, float(s_l), supply)
    cert = DominanceCertificate(grid, worst[0], worst[1], worst[2])
    if not cert.valid:
        raise CertificateFailure(cert.worst_deviation, cert.worst_realization, cert.worst_margin)
    return cert


def solve_with_capacity(
    demand: DemandModel,
    cost: CostDistribution,
    structure: EquilibriumStructure,
    k: float,
    n_grid: int = 1000,
) -> CapacitySolution:
    """Leader optimum when at most ``k`` units may be committed.

    Candidates are scored by their worst continuation. For k in
    (S_low, S_unstable) that worst case at S_L = k is the corner trap, so
    the optimistic profit (continuation S_high at S_L = k) is reported
    alongside.
    """
    if not (0.0 < k <= 1.0):
        raise DomainError(f"capacity {k!r} outside (0, 1]")
    free = solve(demand, cost, structure)
    if k >= free.s_l_star:
        return CapacitySolution(
            k, free.s_l_star, free.regime, free.profit, free.total_supply, free.boundary_hit,
            free.profit, free.total_supply, False,
        )

    cands = {float(x) for x in np.linspace(0.0, k, n_grid)}
    cands |= {x for x in (structure.low, structure.unstable, structure.high, k) if x <= k}
    best = None
    for s_l in sorted(cands):
        outs = deviation_profits(demand, cost, structure, s_l)
        worst_supply, worst = min(outs, key=lambda t: t[1])
        if best is None or worst - best[1] > PROFIT_TIE:
            best = (s_l, worst, worst_supply)
    s_best, worst_profit, worst_supply = best

    if k > structure.high:
        r3 = solve_regime3(demand, cost, structure, upper=k)
        if r3.profit - worst_profit > PROFIT_TIE:
            s_best, worst_profit, worst_supply = r3.s_l_mon, r3.profit, r3.s_l_mon

    outs_k = deviation_profits(demand, cost, structure, k)
    opt_supply, opt_profit = max(outs_k, key=lambda t: t[1])
    return CapacitySolution(
        k, s_best, regime_of(structure, s_best), worst_profit, worst_supply,
        s_best >= 1.0 - BOUNDARY_TOL, opt_profit, opt_supply, True,
    )


# -- constant-marginal-cost leader ------------------------------------------


def alt_fixed_points(
    demand: DemandModel,
    cost: CostDistribution,
    s_l: float,
    c_l: float,
    grid_n: int = DEFAULT_GRID_N,
    tol: float = DEFAULT_TOL,
) -> list[FixedPoint]:
    """Fixed points of S = s_l + G(P(S, S)) on [0, s_l + 1].

    The leader builds off the common stock here, so total supply can exceed one.
    """
    if c_l <= 0:
        raise DomainError("c_l must be > 0")
    if s_l < 0:
        raise DomainError("s_l must be >= 0")
    return _scan_roots(
        lambda x: s_l + response(demand, cost, x),
        lambda x: s_l + float(response(demand, cost, x)),
        lambda x: response_slope(demand, cost, x),
        lambda x: float(demand.price(x, x)),
        cost,
        0.0,
        1.0 + s_l,
        grid_n,
        tol,
    )


def alt_profit(demand: DemandModel, s_l: float, s_star: float, c_l: float) -> float:
    return (float(demand.price(s_star, s_star)) - c_l) * s_l


@dataclass(frozen=True)
class AltScanRow:
    s_l: float
    supplies: tuple[float, ...]
    worst_profit: float
    best_profit: float


def alt_leader_scan(
    demand: DemandModel,
    cost: CostDistribution,
    c_l: float,
    n_grid: int = 101,
    grid_n: int = 20_000,
    tol: float = DEFAULT_TOL,
) -> list[AltScanRow]:
    """Exploratory grid over s_l in [0, 1]: stable continuations and the
    leader's worst and best profit at each commitment."""
    rows = []
    for s_l in np.linspace(0.0, 1.0, n_grid):
        pts = [p for p in alt_fixed_points(demand, cost, float(s_l), c_l, grid_n, tol) if p.stable]
        profits = [alt_profit(demand, float(s_l), p.supply, c_l) for p in pts]
        rows.append(AltScanRow(float(s_l), tuple(p.supply for p in pts), min(profits), max(profits)))
    return rows
