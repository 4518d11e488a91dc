"""Atomistic stage: response curve, fixed points, stability, and the
continuation correspondence given a leader commitment.

The response curve maps total supply S to the mass of sites whose cost is
at most the market-clearing price, G(P(S, S)). Its crossings with the
45-degree line are the atomistic equilibria.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cost_stock import CostDistribution
from .demand import DemandModel
from .errors import Degenerate, DomainError, InternalInconsistency, NoMultiplicity, NonConvergence
from .numerics import bisect

DEFAULT_GRID_N = 100_000
DEFAULT_TOL = 1e-10
SLOPE_TOL = 1e-6


class Kind(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    CORNER_STABLE = "CornerStable"


class Regime(str, enum.Enum):
    I = "I"
    INTERMEDIATE = "Intermediate"
    II = "II"
    III = "III"


class Tag(str, enum.Enum):
    LOW_INTERIOR = "LowInterior"
    HIGH_INTERIOR = "HighInterior"
    CORNER_TRAP = "CornerTrap"
    LEADER_ONLY = "LeaderOnly"


@dataclass(frozen=True)
class FixedPoint:
    supply: float
    kind: Kind
    slope: float

    @property
    def stable(self) -> bool:
        return self.kind is not Kind.UNSTABLE


@dataclass(frozen=True)
class EquilibriumStructure:
    s_low: FixedPoint
    s_unstable: FixedPoint
    s_high: FixedPoint

    def __post_init__(self) -> None:
        if not (self.s_low.supply < self.s_unstable.supply < self.s_high.supply):
            raise InternalInconsistency("fixed points out of order")

    @property
    def low(self) -> float:
        return self.s_low.supply

    @property
    def unstable(self) -> float:
        return self.s_unstable.supply

    @property
    def high(self) -> float:
        return self.s_high.supply

    @property
    def high_is_corner(self) -> bool:
        return self.s_high.kind is Kind.CORNER_STABLE


@dataclass(frozen=True)
class Outcome:
    supply: float
    tag: Tag


@dataclass(frozen=True)
class Correspondence:
    s_l: float
    regime: Regime
    outcomes: tuple[Outcome, ...]

    @property
    def supplies(self) -> list[float]:
        return [o.supply for o in self.outcomes]


# -- response curve ----------------------------------------------------------


def response(demand: DemandModel, cost: CostDistribution, s):
    """G(P(S, S)) with the price clamped to the cost support."""
    p = np.clip(demand.price(s, s), 0.0, cost.c_bar)
    return cost.cdf(p)


def response_slope(demand: DemandModel, cost: CostDistribution, s: float) -> float:
    """Analytic derivative g(P(S,S)) * (dP/dQ + dP/dS); zero where the price is clamped."""
    p = float(demand.price(s, s))
    if p <= 0.0 or p >= cost.c_bar:
        return 0.0
    return cost.density(p) * float(demand.total_slope(s))


def _classify(slope: float, supply: float) -> Kind:
    if abs(slope - 1.0) <= SLOPE_TOL:
        raise Degenerate(f"tangential fixed point at S={supply!r} (slope {slope!r})")
    return Kind.STABLE if slope < 1.0 else Kind.UNSTABLE


def _scan_roots(
    fmap: Callable[[np.ndarray], np.ndarray],
    fmap_scalar: Callable[[float], float],
    slope_at: Callable[[float], float],
    price_at: Callable[[float], float],
    cost: CostDistribution,
    lo: float,
    hi: float,
    grid_n: int,
    tol: float,
) -> list[FixedPoint]:
    """Roots of fmap(S) - S on [lo, hi] by grid bracketing and bisection.

    A CornerStable point is appended at ``hi`` when fmap(hi) >= hi.
    """
    if grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    xs = np.linspace(lo, hi, grid_n + 1)
    ex = fmap(xs) - xs

    roots: list[float] = []
    exact = np.flatnonzero(ex[:-1] == 0.0)
    brackets = np.flatnonzero(ex[:-1] * ex[1:] < 0.0)
    def excess(x: float) -> float:
        return fmap_scalar(x) - x

    for i in sorted(set(exact.tolist()) | set(brackets.tolist())):
        if ex[i] == 0.0:
            roots.append(float(xs[i]))
        else:
            roots.append(bisect(excess, float(xs[i]), float(xs[i + 1]), tol))

    points: list[FixedPoint] = []
    for r in roots:
        p = price_at(r)
        if 0.0 < p < cost.c_bar and cost.near_knot(p):
            raise Degenerate(f"fixed point S={r!r} has price {p!r} on a cost-stock knot")
        slope = slope_at(r)
        points.append(FixedPoint(r, _classify(slope, r), slope))

    if ex[-1] >= 0.0:
        points.append(FixedPoint(float(hi), Kind.CORNER_STABLE, slope_at(float(hi))))

    for a, b in zip(points, points[1:]):
        if b.supply - a.supply < 10.0 * tol:
            raise Degenerate(f"fixed points {a.supply!r} and {b.supply!r} closer than 10*tol (possible tangency)")
    return points


def find_fixed_points(
    demand: DemandModel, cost: CostDistribution, grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOL
) -> list[FixedPoint]:
    """All crossings of the response curve with the diagonal on [0, 1], in increasing supply."""
    return _scan_roots(
        lambda x: response(demand, cost, x),
        lambda x: float(response(demand, cost, x)),
        lambda x: response_slope(demand, cost, x),
        lambda x: float(demand.price(x, x)),
        cost,
        0.0,
        1.0,
        grid_n,
        tol,
    )


def validate_multiplicity(points: Sequence[FixedPoint]) -> EquilibriumStructure:
    kinds = [p.kind for p in points]
    if (
        len(kinds) == 3
        and kinds[0] is Kind.STABLE
        and kinds[1] is Kind.UNSTABLE
        and kinds[2] in (Kind.STABLE, Kind.CORNER_STABLE)
    ):
        return EquilibriumStructure(points[0], points[1], points[2])
    n_stable = sum(1 for k in kinds if k is not Kind.UNSTABLE)
    raise NoMultiplicity(n_stable, [k.value for k in kinds])


def solve_structure(
    demand: DemandModel, cost: CostDistribution, grid_n: int = DEFAULT_GRID_N, tol: float = DEFAULT_TOL
) -> EquilibriumStructure:
    return validate_multiplicity(find_fixed_points(demand, cost, grid_n, tol))


# -- correspondence ----------------------------------------------------------


def regime_of(structure: EquilibriumStructure, s_l: float) -> Regime:
    if s_l <= structure.low:
        return Regime.I
    if s_l < structure.unstable:
        return Regime.INTERMEDIATE
    if s_l <= structure.high:
        return Regime.II
    return Regime.III


def correspondence(
    structure: EquilibriumStructure,
    demand: DemandModel,
    cost: CostDistribution,
    s_l: float,
    tol: float = DEFAULT_TOL,
) -> Correspondence:
    """Stable stage-2 outcomes given the leader's commitment ``s_l``."""
    if not (0.0 <= s_l <= 1.0):
        raise DomainError(f"s_l {s_l!r} outside [0, 1]")
    regime = regime_of(structure, s_l)
    if regime is Regime.I:
        outcomes = (Outcome(structure.low, Tag.LOW_INTERIOR), Outcome(structure.high, Tag.HIGH_INTERIOR))
    elif regime is Regime.INTERMEDIATE:
        # zero entry must be self-confirming; the thresholds are known to tol
        r = float(response(demand, cost, s_l))
        if not r < s_l + 2.0 * tol:
            raise InternalInconsistency(
                f"corner condition G(P(S_L,S_L)) < S_L fails at S_L={s_l!r}: response {r!r}"
            )
        outcomes = (Outcome(s_l, Tag.CORNER_TRAP), Outcome(structure.high, Tag.HIGH_INTERIOR))
    elif regime is Regime.II:
        outcomes = (Outcome(structure.high, Tag.HIGH_INTERIOR),)
    else:
        outcomes = (Outcome(s_l, Tag.LEADER_ONLY),)
    return Correspondence(s_l, regime, outcomes)


# -- adjustment dynamics (basin oracle) ---------------------------------------


@dataclass
class DynamicsResult:
    limit: float
    iterations: int
    step: float
    trajectory: list[float] = field(repr=False)


@functools.lru_cache(maxsize=64)
def monotone_step(demand: DemandModel, cost: CostDistribution, n: int = 10_001) -> float:
    """Largest relaxation step keeping S -> S + step*(G(P(S,S)) - S) order-preserving.

    Order preservation needs 1 + step*(f' - 1) >= 0 everywhere, so the step
    is 1 / (1 - min(f', 0)) over a dense grid of analytic slopes.
    """
    xs = np.linspace(0.0, 1.0, n)
    min_slope = min(response_slope(demand, cost, float(x)) for x in xs)
    return 1.0 / (1.0 - min(min_slope, 0.0))


def iterate_dynamics(
    demand: DemandModel,
    cost: CostDistribution,
    s0: float,
    s_l: float = 0.0,
    max_iter: int = 100_000,
    tol: float = 1e-12,
    step: float | str = "auto",
) -> DynamicsResult:
    """Relaxed best-response iteration S <- S + step*(max(s_l, G(P(S,S))) - S).

    ``step=1`` is the plain map S <- max(s_l, G(P(S,S))). That map oscillates
    around any stable point where the response slope is below -1, so the
    default picks the order-preserving step from ``monotone_step``; with it,
    starts below the unstable point stay below it and the limits split
    exactly at the threshold.
    """
    if not (0.0 <= s0 <= 1.0):
        raise DomainError(f"s0 {s0!r} outside [0, 1]")
    lam = monotone_step(demand, cost) if step == "auto" else float(step)
    if not (0.0 < lam <= 1.0):
        raise ValueError("step must lie in (0, 1]")
    s = float(s0)
    traj = [s]
    for it in range(1, max_iter + 1):
        target = max(s_l, float(response(demand, cost, s)))
        nxt = s + lam * (target - s)
        traj.append(nxt)
        if abs(nxt - s) < tol:
            return DynamicsResult(nxt, it, lam, traj)
        s = nxt
    raise NonConvergence(
        f"dynamics from s0={s0!r} did not settle in {max_iter} iterations", tuple(traj[-2:])
    )


# -- agent-level check ----------------------------------------------------------


@dataclass(frozen=True)
class AgentCheck:
    passed: bool
    price: float
    entrant_mass: float
    expected_mass: float
    n_samples: int
    falsifying: dict | None = None


def agent_cutoff_check(
    demand: DemandModel, cost: CostDistribution, s_star: float, s_l: float, n_samples: int = 100_000
) -> AgentCheck:
    """Check the cutoff profile behind a claimed outcome developer by developer.

    Remaining sites are sampled on a stratified mass grid over (s_l, 1]. The
    claimed outcome prescribes building to the cheapest s_star - s_l of them;
    each developer's best response is to build iff its cost is at most
    P(s_star, s_star). The check fails on the first developer whose
    prescription differs from its best response, or when the best-response
    entrant mass misses s_star - s_l by more than 1/n_samples.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    p = float(demand.price(s_star, s_star))
    width = 1.0 - s_l
    masses = s_l + (np.arange(n_samples) + 0.5) * (width / n_samples)
    costs = np.asarray(cost.quantile(masses), dtype=float)
    builds = costs <= p
    prescribed = masses <= s_star
    # cost ties within the root tolerance count as indifferent
    indifferent = np.abs(costs - p) <= 1e-9
    mismatch = np.flatnonzero((builds != prescribed) & ~indifferent)

    entrant_mass = float(builds.sum()) * width / n_samples
    expected = s_star - s_l
    falsifying = None
    if mismatch.size:
        j = int(mismatch[0])
        falsifying = {
            "mass": float(masses[j]),
            "cost": float(costs[j]),
            "prescribed_build": bool(prescribed[j]),
            "profit_if_build": p - float(costs[j]),
        }
    mass_ok = abs(entrant_mass - expected) <= max(1.0 / n_samples, 1e-12)
    if not mass_ok and falsifying is None:
        falsifying = {"entrant_mass": entrant_mass, "expected_mass": expected}
    return AgentCheck(falsifying is None, p, entrant_mass, expected, n_samples, falsifying)

