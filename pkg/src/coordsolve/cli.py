"""coord-solve command line.

Every command reads one scenario file and writes
``<out>/<scenario-name>.<command>.csv`` and/or ``.json``.

Exit codes: 0 success, 1 input or validation error, 2 the fixed points do
not show the low/unstable/high pattern (or are degenerate), 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import equilibrium as eq
from . import leader as ld
from . import welfare as wf
from .demand import validate as validate_demand
from .errors import (
    AssumptionViolation,
    CertificateFailure,
    Degenerate,
    DomainError,
    InternalInconsistency,
    InvalidParameter,
    NoMultiplicity,
    NonConvergence,
    OrderingViolation,
    ParseError,
    ScenarioValidationError,
)
from .scenario import (
    SWEEP_COLUMNS,
    Scenario,
    SweepSpec,
    fixed_point_dict,
    leader_dict,
    load_scenario,
    planner_dict,
    decomposition_dict,
    report,
    solve_leader,
    structure,
    structure_dict,
    sweep,
    welfare_rows,
)

EXIT_OK, EXIT_INPUT, EXIT_ASSUMPTION, EXIT_NUMERIC = 0, 1, 2, 3

_EXIT_CODES: tuple[tuple[type[BaseException], int], ...] = (
    (ParseError, EXIT_INPUT),
    (ScenarioValidationError, EXIT_INPUT),
    (InvalidParameter, EXIT_INPUT),
    (AssumptionViolation, EXIT_INPUT),
    (DomainError, EXIT_INPUT),
    (NoMultiplicity, EXIT_ASSUMPTION),
    (Degenerate, EXIT_ASSUMPTION),
    (NonConvergence, EXIT_NUMERIC),
    (CertificateFailure, EXIT_NUMERIC),
    (OrderingViolation, EXIT_NUMERIC),
    (InternalInconsistency, EXIT_NUMERIC),
    (OSError, EXIT_INPUT),
)


def exit_code_for(exc: BaseException) -> int | None:
    for cls, code in _EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return None


# -- emission -------------------------------------------------------------------


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])


def _jsonable(v: Any) -> Any:
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _jsonable(v.item())
    return v


def write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n")


class Emitter:
    def __init__(self, out: Path, name: str, command: str):
        self.out, self.stem = out, f"{name}.{command}"

    def csv(self, columns, rows) -> Path:
        p = self.out / f"{self.stem}.csv"
        write_csv(p, columns, rows)
        return p

    def json(self, doc) -> Path:
        p = self.out / f"{self.stem}.json"
        write_json(p, doc)
        return p


# -- commands -------------------------------------------------------------------


def cmd_validate(sc: Scenario, args, em: Emitter) -> None:
    rep = validate_demand(sc.demand)
    fps = eq.find_fixed_points(sc.demand, sc.cost, sc.solver.grid_n, sc.solver.tol)
    doc = {
        "scenario": sc.to_dict(),
        "demand_check": {
            "passed": rep.passed, "grid_n": rep.grid_n,
            "max_dprice_dq": rep.max_dprice_dq, "min_dprice_ds": rep.min_dprice_ds,
        },
        "fixed_points": [fixed_point_dict(p) for p in fps],
    }
    try:
        doc["structure"] = structure_dict(eq.validate_multiplicity(fps))
    finally:
        # the diagnostic document is written even when the pattern check fails
        doc.setdefault("structure", None)
        em.json(doc)


def cmd_fixed_points(sc: Scenario, args, em: Emitter) -> None:
    fps = eq.find_fixed_points(sc.demand, sc.cost, sc.solver.grid_n, sc.solver.tol)
    em.csv(("supply", "kind", "slope"), [fixed_point_dict(p) for p in fps])


def cmd_correspondence(sc: Scenario, args, em: Emitter) -> None:
    st = structure(sc)
    corr = eq.correspondence(st, sc.demand, sc.cost, args.sl, sc.solver.tol)
    rows = [{"supply": o.supply, "tag": o.tag.value} for o in corr.outcomes]
    em.csv(("supply", "tag"), rows)
    em.json({"s_l": corr.s_l, "regime": corr.regime.value, "structure": structure_dict(st), "outcomes": rows})


def cmd_dynamics(sc: Scenario, args, em: Emitter) -> None:
    step = "auto" if args.step is None else args.step
    res = eq.iterate_dynamics(sc.demand, sc.cost, args.s0, args.sl, max_iter=args.max_iter, step=step)
    em.csv(("iteration", "supply"), [{"iteration": i, "supply": s} for i, s in enumerate(res.trajectory)])
    em.json({"s0": args.s0, "s_l": args.sl, "limit": res.limit, "iterations": res.iterations, "step": res.step})


def cmd_solve(sc: Scenario, args, em: Emitter) -> None:
    st = structure(sc)
    lead = solve_leader(sc, st)
    doc = leader_dict(lead["solution"], lead["certificate"], lead["expansion"])
    doc["structure"] = structure_dict(st)
    em.json(doc)


def cmd_capacity(sc: Scenario, args, em: Emitter) -> None:
    st = structure(sc)
    cap = ld.solve_with_capacity(sc.demand, sc.cost, st, args.k)
    em.json({
        "k": cap.k,
        "s_l_star": cap.s_l_star,
        "regime": cap.regime.value,
        "profit": cap.profit,
        "total_supply": cap.total_supply,
        "boundary_hit": cap.boundary_hit,
        "binding": cap.binding,
        "optimistic_profit": cap.optimistic_profit,
        "optimistic_supply": cap.optimistic_supply,
        "structure": structure_dict(st),
    })


def cmd_alt(sc: Scenario, args, em: Emitter) -> None:
    d, c = sc.demand, sc.cost
    if args.sl is None:
        scan = ld.alt_leader_scan(d, c, args.cl, tol=sc.solver.tol)
        rows = [
            {
                "s_l": r.s_l, "n_stable": len(r.supplies), "s_min": min(r.supplies), "s_max": max(r.supplies),
                "worst_profit": r.worst_profit, "best_profit": r.best_profit,
            }
            for r in scan
        ]
        em.csv(("s_l", "n_stable", "s_min", "s_max", "worst_profit", "best_profit"), rows)
        return
    fps = ld.alt_fixed_points(d, c, args.sl, args.cl, sc.solver.grid_n, sc.solver.tol)
    rows = []
    for p in fps:
        row = fixed_point_dict(p)
        row["profit"] = ld.alt_profit(d, args.sl, p.supply, args.cl)
        aw = wf.alt_welfare(d, c, args.sl, p.supply, args.cl) if p.supply >= args.sl else None
        row["welfare"] = None if aw is None else aw.welfare
        row["leader_more_efficient"] = None if aw is None else aw.leader_more_efficient
        rows.append(row)
    cols = ("supply", "kind", "slope", "profit", "welfare", "leader_more_efficient")
    em.csv(cols, rows)
    em.json({"s_l": args.sl, "c_l": args.cl, "fixed_points": rows})


def cmd_welfare(sc: Scenario, args, em: Emitter) -> None:
    st = structure(sc)
    sol = ld.solve(sc.demand, sc.cost, st)
    pl = wf.planner_solve(sc.demand, sc.cost)
    em.csv(("point_label", "supply", "welfare", "marginal_welfare", "externality_gap"), welfare_rows(sc, st, sol, pl))


def cmd_planner(sc: Scenario, args, em: Emitter) -> None:
    em.json(planner_dict(wf.planner_solve(sc.demand, sc.cost)))


def cmd_decompose(sc: Scenario, args, em: Emitter) -> None:
    st = structure(sc)
    em.json(decomposition_dict(wf.decompose(sc.demand, sc.cost, st)))


def cmd_sweep(sc: Scenario, args, em: Emitter) -> None:
    spec = SweepSpec(args.param, args.start, args.stop, args.steps, args.gap_at)
    em.csv(SWEEP_COLUMNS, sweep(sc, spec))


def cmd_report(sc: Scenario, args, em: Emitter) -> None:
    em.json(report(sc))


COMMANDS = {
    "validate": cmd_validate,
    "fixed-points": cmd_fixed_points,
    "correspondence": cmd_correspondence,
    "dynamics": cmd_dynamics,
    "solve": cmd_solve,
    "capacity": cmd_capacity,
    "alt": cmd_alt,
    "welfare": cmd_welfare,
    "planner": cmd_planner,
    "decompose": cmd_decompose,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coord-solve", description="Housing supply coordination solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--out", default=".", help="output directory (default: current)")

    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "correspondence":
            p.add_argument("--sl", type=float, required=True)
        elif name == "dynamics":
            p.add_argument("--s0", type=float, required=True)
            p.add_argument("--sl", type=float, default=0.0)
            p.add_argument("--step", type=float, default=None, help="relaxation step in (0, 1]; default auto")
            p.add_argument("--max-iter", type=int, default=100_000)
        elif name == "capacity":
            p.add_argument("--k", type=float, required=True)
        elif name == "alt":
            p.add_argument("--cl", type=float, required=True)
            p.add_argument("--sl", type=float, default=None)
        elif name == "sweep":
            p.add_argument("--param", required=True)
            p.add_argument("--from", dest="start", type=float, required=True)
            p.add_argument("--to", dest="stop", type=float, required=True)
            p.add_argument("--steps", type=int, required=True)
            p.add_argument("--gap-at", type=float, default=0.5, help="supply at which gap_at_ref is evaluated")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        sc = load_scenario(args.scenario)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](sc, args, Emitter(out, sc.name, args.command))
    except Exception as e:  # noqa: BLE001 - mapped to documented exit codes below
        code = exit_code_for(e)
        if code is None:
            raise
        print(f"coord-solve: {type(e).__name__}: {e}", file=sys.stderr)
        return code
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
