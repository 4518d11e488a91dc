"""Scenario documents, the full solve pipeline, and parameter sweeps.

A scenario is one JSON document::

    {
      "name": "canonical",
      "demand": {"kind": "specified", "q_max": 0.4, "beta": 1, "gamma": 1.5, "alpha": 2},
      "cost": {"kind": "piecewise", "knots": [[0, 0], ..., [1, 1]]},
      "solver": {"grid_n": 100000, "tol": 1e-10, "dominance_grid_n": 500}
    }

``demand.kind`` defaults to "specified"; "logistic" takes ``midpoint`` and
``steepness`` in place of ``alpha``. ``solver`` and each of its keys are
optional.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import equilibrium as eq
from . import leader as ld
from . import welfare as wf
from .cost_stock import CostDistribution, PiecewiseLinear, Smoothstep, Uniform
from .demand import DemandModel, DemandParams, LogisticNetwork, SpecifiedLinearNetwork
from .errors import InvalidParameter, NoMultiplicity, Degenerate, ParseError, ScenarioValidationError

REPORT_SCHEMA_VERSION = "1.0"
SWEEP_PARAMS = ("q_max", "beta", "gamma", "alpha", "c_l", "k")
SWEEP_COLUMNS = (
    "param_value", "status", "s_low", "s_unstable", "s_high", "s_l_star", "regime", "leader_profit",
    "s_fb", "w_low", "w_high", "w_leader", "w_fb", "expansion_margin", "gap_at_ref",
)


@dataclass(frozen=True)
class SolverSettings:
    grid_n: int = eq.DEFAULT_GRID_N
    tol: float = eq.DEFAULT_TOL
    dominance_grid_n: int = 500


@dataclass(frozen=True)
class Scenario:
    name: str
    demand: DemandModel
    cost: CostDistribution
    solver: SolverSettings = field(default_factory=SolverSettings)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "demand": self.demand.params(),
            "cost": self.cost.to_dict(),
            "solver": {
                "grid_n": self.solver.grid_n,
                "tol": self.solver.tol,
                "dominance_grid_n": self.solver.dominance_grid_n,
            },
        }


def load_schema(name: str) -> dict:
    return json.loads(resources.files("coordsolve").joinpath("schemas", name).read_text())


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def build_demand(doc: dict) -> DemandModel:
    kind = doc.get("kind", "specified")
    try:
        if kind == "specified":
            return SpecifiedLinearNetwork(
                DemandParams(doc["q_max"], doc["beta"], doc["gamma"], doc["alpha"])
            )
        return LogisticNetwork(doc["q_max"], doc["beta"], doc["gamma"], doc["midpoint"], doc["steepness"])
    except InvalidParameter as e:
        raise ScenarioValidationError(f"demand.{e.field}", e.message) from None


def build_cost(doc: dict) -> CostDistribution:
    kind = doc["kind"]
    try:
        if kind == "uniform":
            return Uniform(doc["c_bar"])
        if kind == "smoothstep":
            return Smoothstep(doc["c_bar"])
        return PiecewiseLinear(doc["knots"])
    except InvalidParameter as e:
        raise ScenarioValidationError(f"cost.{e.field}", e.message) from None


def scenario_from_dict(doc: Any) -> Scenario:
    validator = jsonschema.Draft202012Validator(load_schema("scenario.schema.json"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ScenarioValidationError(_json_path(err.absolute_path), err.message)
    demand = build_demand(doc["demand"])
    cost = build_cost(doc["cost"])
    solver = SolverSettings(**doc.get("solver", {}))
    return Scenario(doc["name"], demand, cost, solver)


def load_scenario(path: str | os.PathLike) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from None
    return scenario_from_dict(doc)


# -- pipeline ---------------------------------------------------------------


def fixed_points(sc: Scenario) -> list[eq.FixedPoint]:
    return eq.find_fixed_points(sc.demand, sc.cost, sc.solver.grid_n, sc.solver.tol)


def structure(sc: Scenario) -> eq.EquilibriumStructure:
    return eq.validate_multiplicity(fixed_points(sc))


def fixed_point_dict(p: eq.FixedPoint) -> dict:
    return {"supply": p.supply, "kind": p.kind.value, "slope": p.slope}


def structure_dict(st: eq.EquilibriumStructure) -> dict:
    return {"s_low": st.low, "s_unstable": st.unstable, "s_high": st.high, "high_is_corner": st.high_is_corner}


def leader_dict(sol: ld.LeaderSolution, cert: ld.DominanceCertificate | None, exp: ld.ExpansionCondition) -> dict:
    return {
        "s_l_star": sol.s_l_star,
        "regime": sol.regime.value,
        "profit": sol.profit,
        "total_supply": sol.total_supply,
        "boundary_hit": sol.boundary_hit,
        "regime2_profit": sol.regime2_profit,
        "regime3_profit": sol.regime3_profit,
        "foc_residual": sol.foc_residual,
        "dominance_margin": None if cert is None else cert.worst_margin,
        "expansion": {"holds": exp.holds, "margin": exp.margin, "index": exp.index},
    }


def planner_dict(pl: wf.PlannerSolution) -> dict:
    return {
        "s_fb": pl.s_fb,
        "welfare": pl.welfare,
        "boundary_hit": pl.boundary_hit,
        "foc_residual": pl.foc_residual,
        "single_peaked": pl.single_peaked,
    }


def decomposition_dict(d: wf.Decomposition) -> dict:
    return {
        "term_a": d.term_a,
        "term_b": d.term_b,
        "term_c": d.term_c,
        "welfare_gain": d.welfare_gain,
        "residual": d.residual,
    }


def ordering_dict(o: wf.OrderingReport) -> dict:
    return {
        "rows": [{"label": r.label, "supply": r.supply, "welfare": r.welfare} for r in o.rows],
        "high_vs_low_strict": o.high_vs_low_strict,
        "leader_vs_high_strict": o.leader_vs_high_strict,
        "planner_vs_leader_strict": o.planner_vs_leader_strict,
        "boundary_coincidence": o.boundary_coincidence,
    }


def solve_leader(sc: Scenario, st: eq.EquilibriumStructure) -> dict:
    sol = ld.solve(sc.demand, sc.cost, st)
    cert = ld.verify_dominance(sc.demand, sc.cost, st, sol, sc.solver.dominance_grid_n)
    exp = ld.expansion_condition(sc.demand, st)
    return {"solution": sol, "certificate": cert, "expansion": exp}


def welfare_rows(sc: Scenario, st: eq.EquilibriumStructure, sol: ld.LeaderSolution, pl: wf.PlannerSolution) -> list[dict]:
    d, c = sc.demand, sc.cost
    points = [
        ("s_low", st.low), ("s_unstable", st.unstable), ("s_high", st.high),
        ("leader", sol.total_supply), ("planner", pl.s_fb),
    ]
    return [
        {
            "point_label": label,
            "supply": s,
            "welfare": wf.welfare(d, c, s),
            "marginal_welfare": wf.marginal_welfare(d, c, s),
            "externality_gap": wf.externality_gap(d, s),
        }
        for label, s in points
    ]


def report(sc: Scenario) -> dict:
    """Fixed points, leader solution with dominance certificate, planner,
    decomposition and welfare ordering as one JSON-ready document."""
    d, c = sc.demand, sc.cost
    fps = fixed_points(sc)
    st = eq.validate_multiplicity(fps)
    lead = solve_leader(sc, st)
    sol = lead["solution"]
    pl = wf.planner_solve(d, c)
    dec = wf.decompose(d, c, st)
    order = wf.ordering_report(d, c, st, sol, pl)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "scenario": sc.to_dict(),
        "fixed_points": [fixed_point_dict(p) for p in fps],
        "structure": structure_dict(st),
        "leader": leader_dict(sol, lead["certificate"], lead["expansion"]),
        "planner": planner_dict(pl),
        "decomposition": decomposition_dict(dec),
        "welfare": {
            "ordering": ordering_dict(order),
            "table": welfare_rows(sc, st, sol, pl),
        },
    }


# -- sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int
    gap_at: float = 0.5

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMS:
            raise ScenarioValidationError("sweep.param", f"must be one of {SWEEP_PARAMS}")
        if self.steps < 2:
            raise ScenarioValidationError("sweep.steps", "must be >= 2")
        if not self.start < self.stop:
            raise ScenarioValidationError("sweep.from", "must be < to")
        if not (0.0 <= self.gap_at <= 1.0):
            raise ScenarioValidationError("sweep.gap_at", "must lie in [0, 1]")

    def values(self) -> list[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


def _check_sweep(sc: Scenario, spec: SweepSpec) -> None:
    if spec.parameter in ("c_l",):
        if spec.start <= 0:
            raise ScenarioValidationError("sweep.from", "c_l must be > 0")
        return
    if spec.parameter == "k":
        if spec.start <= 0 or spec.stop > 1:
            raise ScenarioValidationError("sweep.from", "k must lie in (0, 1]")
        return
    if spec.parameter not in sc.demand.params():
        raise ScenarioValidationError("sweep.param", f"{spec.parameter!r} is not a parameter of {sc.demand.kind} demand")
    for v in (spec.start, spec.stop):
        try:
            sc.demand.replace(**{spec.parameter: v})
        except InvalidParameter as e:
            raise ScenarioValidationError(f"sweep.{e.field}", e.message) from None


def _sweep_row(sc: Scenario, spec: SweepSpec, value: float) -> dict:
    demand = sc.demand
    if spec.parameter in ("q_max", "beta", "gamma", "alpha"):
        demand = demand.replace(**{spec.parameter: value})
    d, c = demand, sc.cost
    row: dict[str, Any] = {k: None for k in SWEEP_COLUMNS}
    row["param_value"] = value
    pl = wf.planner_solve(d, c)
    row["s_fb"], row["w_fb"] = pl.s_fb, pl.welfare
    row["gap_at_ref"] = wf.externality_gap(d, spec.gap_at)
    try:
        st = eq.validate_multiplicity(eq.find_fixed_points(d, c, sc.solver.grid_n, sc.solver.tol))
    except NoMultiplicity:
        row["status"] = "no_multiplicity"
        return row
    except Degenerate:
        row["status"] = "degenerate"
        return row
    row.update(status="ok", s_low=st.low, s_unstable=st.unstable, s_high=st.high)
    row["w_low"] = wf.welfare(d, c, st.low)
    row["w_high"] = wf.welfare(d, c, st.high)
    row["expansion_margin"] = ld.expansion_condition(d, st).margin

    if spec.parameter == "k":
        cap = ld.solve_with_capacity(d, c, st, value)
        s_star, regime, profit, supply = cap.s_l_star, cap.regime.value, cap.profit, cap.total_supply
    elif spec.parameter == "c_l":
        scan = ld.alt_leader_scan(d, c, value, grid_n=max(1000, sc.solver.grid_n // 5), tol=sc.solver.tol)
        best = scan[0]
        for r in scan:
            if r.worst_profit - best.worst_profit > ld.PROFIT_TIE:
                best = r
        s_star, regime, profit, supply = best.s_l, "alt", best.worst_profit, min(best.supplies)
    else:
        sol = ld.solve(d, c, st)
        s_star, regime, profit, supply = sol.s_l_star, sol.regime.value, sol.profit, sol.total_supply
    row.update(s_l_star=s_star, regime=regime, leader_profit=profit)
    row["w_leader"] = wf.welfare(d, c, supply) if supply <= 1.0 else None
    return row


def sweep(sc: Scenario, spec: SweepSpec, threads: int | None = None) -> list[dict]:
    """One row per parameter value, in grid order.

    Rows are independent and may be computed on ``threads`` workers
    (default from COORD_SOLVE_THREADS, else 1); ordering never depends on it.
    """
    _check_sweep(sc, spec)
    if threads is None:
        threads = int(os.environ.get("COORD_SOLVE_THREADS", "1") or 1)
    values = spec.values()
    if threads <= 1:
        return [_sweep_row(sc, spec, v) for v in values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda v: _sweep_row(sc, spec, v), values))


def with_solver(sc: Scenario, **changes) -> Scenario:
    return replace(sc, solver=replace(sc.solver, **changes))
