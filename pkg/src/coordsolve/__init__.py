"""Equilibrium, leader and welfare solver for housing supply with network effects."""

from .cost_stock import CANONICAL_KNOTS, PiecewiseLinear, Smoothstep, Uniform
from .demand import DemandParams, LogisticNetwork, SpecifiedLinearNetwork, validate
from .equilibrium import (
    Kind,
    Regime,
    Tag,
    agent_cutoff_check,
    correspondence,
    find_fixed_points,
    iterate_dynamics,
    response,
    validate_multiplicity,
)
from .errors import *  # noqa: F401,F403
from .leader import solve, solve_with_capacity, verify_dominance
from .scenario import Scenario, SweepSpec, load_scenario, report, sweep
from .welfare import decompose, externality_gap, marginal_welfare, planner_solve

__version__ = "0.1.0"


def canonical():
    """The reference demand and cost stock: (demand, cost)."""
    return SpecifiedLinearNetwork(DemandParams(0.4, 1.0, 1.5, 2.0)), PiecewiseLinear(CANONICAL_KNOTS)
