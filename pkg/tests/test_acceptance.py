"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json
import time

import numpy as np
import pytest

from conftest import SCENARIOS, exact_canonical_roots, record
from coordsolve import LogisticNetwork, Uniform, load_scenario
from coordsolve import leader as ld
from coordsolve import welfare as wf
from coordsolve.cli import run
from coordsolve.demand import SpecifiedLinearNetwork
from coordsolve.equilibrium import (
    Kind,
    Regime,
    Tag,
    agent_cutoff_check,
    correspondence,
    find_fixed_points,
    iterate_dynamics,
    response,
    solve_structure,
    validate_multiplicity,
)
from coordsolve.errors import NoMultiplicity

CORPUS = ["canonical", "weak_network", "corner_high", "gamma_1_45", "gamma_1_55", "steep_tail", "smoothstep"]


def _load(name):
    return load_scenario(SCENARIOS / f"{name}.json")


def test_01_multiplicity(canonical_demand, canonical_cost):
    t0 = time.perf_counter()
    pts = find_fixed_points(canonical_demand, canonical_cost, grid_n=100_000, tol=1e-10)
    elapsed = time.perf_counter() - t0
    exact = exact_canonical_roots()
    kinds = [p.kind for p in pts]
    err = max(abs(p.supply - e) for p, e in zip(pts, exact)) if len(pts) == len(exact) else np.inf
    ok = (
        kinds == [Kind.STABLE, Kind.UNSTABLE, Kind.STABLE]
        and all(0.0 < p.supply < 1.0 for p in pts)
        and err <= 1e-8
        and elapsed < 1.0
    )
    record(1, ok, f"points {[round(p.supply, 6) for p in pts]} max err vs exact roots {err:.1e}, {elapsed:.2f}s")


def test_02_basins(canonical_demand, canonical_cost, canonical_structure):
    st = canonical_structure
    t0 = time.perf_counter()
    bad = []
    for s0 in np.linspace(0.0, 1.0, 200):
        if abs(s0 - st.unstable) <= 1e-3:
            continue
        lim = iterate_dynamics(canonical_demand, canonical_cost, float(s0), 0.0).limit
        target = st.low if s0 < st.unstable else st.high
        if abs(lim - target) > 1e-9:
            bad.append(float(s0))
    elapsed = time.perf_counter() - t0
    record(2, not bad and elapsed < 1.0, f"200 starts, misrouted {bad[:3]}, {elapsed:.2f}s")


def test_03_correspondence(canonical_demand, canonical_cost, canonical_structure):
    d, c, st = canonical_demand, canonical_cost, canonical_structure
    bands = {
        Regime.I: np.linspace(0.0, st.low, 100),
        Regime.INTERMEDIATE: np.linspace(st.low, st.unstable, 102)[1:-1],
        Regime.II: np.linspace(st.unstable, st.high, 100),
        Regime.III: np.linspace(st.high, 1.0, 101)[1:],
    }
    expected_tags = {
        Regime.I: [Tag.LOW_INTERIOR, Tag.HIGH_INTERIOR],
        Regime.INTERMEDIATE: [Tag.CORNER_TRAP, Tag.HIGH_INTERIOR],
        Regime.II: [Tag.HIGH_INTERIOR],
        Regime.III: [Tag.LEADER_ONLY],
    }
    worst, failures = 0.0, []
    for regime, grid in bands.items():
        for s_l in map(float, grid):
            corr = correspondence(st, d, c, s_l)
            want = {
                Regime.I: [st.low, st.high],
                Regime.INTERMEDIATE: [s_l, st.high],
                Regime.II: [st.high],
                Regime.III: [s_l],
            }[regime]
            if corr.regime is not regime or [o.tag for o in corr.outcomes] != expected_tags[regime] or corr.supplies != want:
                failures.append((regime.value, s_l))
            for o in corr.outcomes:
                worst = max(worst, abs(max(s_l, float(response(d, c, o.supply))) - o.supply))
            if regime is Regime.INTERMEDIATE and not float(c.cdf(d.price(s_l, s_l))) < s_l:
                failures.append(("corner", s_l))
    ok = not failures and worst <= 2e-10
    record(3, ok, f"400 commitments, max fixed-point residual {worst:.1e}, failures {failures[:3]}")


def test_04_commitment_and_dominance():
    lines, ok = [], True
    for name in CORPUS:
        t0 = time.perf_counter()
        sc = _load(name)
        st = solve_structure(sc.demand, sc.cost, sc.solver.grid_n, sc.solver.tol)
        sol = ld.solve(sc.demand, sc.cost, st)
        cert = ld.verify_dominance(sc.demand, sc.cost, st, sol, 500)
        elapsed = time.perf_counter() - t0
        good = sol.s_l_star >= st.high and cert.worst_margin > 0 and elapsed < 5.0
        ok &= good
        lines.append(f"{name}: s_l*={sol.s_l_star:.4f}>=S_high={st.high:.4f} margin={cert.worst_margin:.3g} {elapsed:.2f}s")
    record(4, ok and len(CORPUS) >= 5, f"{len(CORPUS)} scenarios; " + "; ".join(lines))


def test_05_expansion_threshold():
    base = _load("canonical")
    sign_err, iff_fail, n_ok = 0.0, [], 0
    for g in np.linspace(1.2, 1.8, 25):
        d = base.demand.replace(gamma=float(g))
        try:
            st = solve_structure(d, base.cost)
        except NoMultiplicity:
            continue
        n_ok += 1
        e = ld.expansion_condition(d, st)
        index = d.gamma * d.alpha * st.high ** (d.alpha - 1)
        # same sign, and the identity beta*margin = index - 1 to 1e-10
        sign_err = max(sign_err, abs(d.beta * e.margin - (index - 1.0)))
        if np.sign(e.margin) != np.sign(index - 1.0):
            sign_err = np.inf
        # with a corner high there is no room above S_high for the leader to expand into
        if not st.high_is_corner and (ld.solve(d, base.cost, st).regime is Regime.III) != e.holds:
            iff_fail.append(float(g))

    # straddle: saturating network family whose margin changes sign inside the sweep
    lg = _load("threshold_logistic")
    signs = set()
    for g in np.linspace(0.89, 1.10, 25):
        d = lg.demand.replace(gamma=float(g))
        try:
            st = solve_structure(d, lg.cost)
        except NoMultiplicity:
            continue
        e = ld.expansion_condition(d, st)
        signs.add(e.holds)
        if not st.high_is_corner and (ld.solve(d, lg.cost, st).regime is Regime.III) != e.holds:
            iff_fail.append(("logistic", float(g)))
    ok = sign_err <= 1e-10 and not iff_fail and signs == {True, False} and n_ok > 0
    record(
        5, ok,
        f"power-law sweep {n_ok}/25 validated, sign identity err {sign_err:.1e}; "
        f"logistic sweep straddles={signs == {True, False}}; iff failures {iff_fail}",
    )


def test_06_whole_market_profit(canonical_cost):
    g = canonical_cost
    h, worst, n = 1e-6, 0.0, 0
    for s in np.linspace(0.005, 0.995, 200):
        c = float(g.quantile(s))
        if g.near_knot(c, 1e-4):
            continue
        fd = (ld.whole_market_profit(g, s + h) - ld.whole_market_profit(g, s - h)) / (2 * h)
        worst = max(worst, abs(fd - ld.whole_market_profit_slope(g, float(s))))
        n += 1
        if n == 100:
            break
    xs = np.random.default_rng(0).uniform(0.0, 1.0, 100)
    exact = all(ld.whole_market_profit(Uniform(1.0), float(x)) == x * x / 2 for x in xs)
    ulps = max(
        abs(ld.whole_market_profit(Uniform(cb), float(x)) - x * x * cb / 2) / np.spacing(x * x * cb / 2)
        for cb in (0.3, 2.5) for x in xs
    )
    ok = n == 100 and worst <= 1e-5 and exact and ulps <= 2
    record(6, ok, f"FD err {worst:.1e} at {n} points; uniform closed form exact at c_bar=1, {ulps:.0f} ulp otherwise")


def test_07_lemma_gap():
    worst_id, worst_closed, min_gap, n = 0.0, 0.0, np.inf, 0
    for name in CORPUS:
        sc = _load(name)
        for p in find_fixed_points(sc.demand, sc.cost):
            if p.kind is not Kind.STABLE:
                continue  # corner points are exempt; there P(1,1) > G^-1(1)
            gap = wf.externality_gap(sc.demand, p.supply)
            worst_id = max(worst_id, abs(wf.marginal_welfare(sc.demand, sc.cost, p.supply) - gap))
            min_gap = min(min_gap, gap)
            if isinstance(sc.demand, SpecifiedLinearNetwork):
                d = sc.demand
                closed = d.gamma * d.alpha * p.supply**d.alpha / d.beta
                worst_closed = max(worst_closed, abs(gap - closed))
            n += 1
    ok = worst_id <= 1e-8 and min_gap > 0 and worst_closed <= 1e-10
    record(7, ok, f"{n} interior stable points, |dW/dS - gap| {worst_id:.1e}, min gap {min_gap:.3g}, closed-form err {worst_closed:.1e}")


def test_08_decomposition():
    worst, ok = 0.0, True
    for name in CORPUS:
        sc = _load(name)
        st = solve_structure(sc.demand, sc.cost)
        dec = wf.decompose(sc.demand, sc.cost, st)
        ok &= dec.term_a > dec.term_c > 0 and dec.term_b > 0
        worst = max(worst, abs(dec.term_a - dec.term_c + dec.term_b - (wf.welfare(sc.demand, sc.cost, st.high) - wf.welfare(sc.demand, sc.cost, st.low))))
    record(8, ok and worst <= 1e-8, f"A > C > 0, B > 0 on {len(CORPUS)} scenarios, identity err {worst:.1e}")


def test_09_planner_ordering():
    ok, interior, flagged = True, [], []
    for name in CORPUS:
        sc = _load(name)
        st = solve_structure(sc.demand, sc.cost)
        sol = ld.solve(sc.demand, sc.cost, st)
        pl = wf.planner_solve(sc.demand, sc.cost)
        ok &= pl.s_fb >= st.high
        rep = wf.ordering_report(sc.demand, sc.cost, st, sol, pl)
        if rep.boundary_coincidence:
            flagged.append(name)
        if ld.expansion_condition(sc.demand, st).holds and not sol.boundary_hit and not pl.boundary_hit:
            w_lead, w_high = wf.welfare(sc.demand, sc.cost, sol.s_l_star), wf.welfare(sc.demand, sc.cost, st.high)
            ok &= st.high < sol.s_l_star <= pl.s_fb and w_lead > w_high
            interior.append(f"{name} ({st.high:.4f} < {sol.s_l_star:.4f} <= {pl.s_fb:.4f})")
    ok &= bool(interior)
    record(9, ok, f"s_fb >= S_high everywhere; interior cases {interior}; boundary coincidences flagged {flagged}")


def test_10_capacity(canonical_demand, canonical_cost, canonical_structure):
    d, c, st = canonical_demand, canonical_cost, canonical_structure
    regime1 = np.linspace(0.0, st.low, 2001)
    # best Regime-I alternative under either continuation, by direct enumeration
    best_alt = max(
        float(d.price(s_star, s_star)) * s - c.cumulative_cost(float(s))
        for s in regime1 for s_star in (st.low, st.high)
    )
    fails = []
    for k in np.linspace(st.unstable, st.high, 12)[1:-1]:
        cap = ld.solve_with_capacity(d, c, st, float(k))
        if not (cap.s_l_star == pytest.approx(k, abs=1e-12) and cap.total_supply == st.high and cap.profit > best_alt):
            fails.append(float(k))
    record(10, not fails, f"10 capacities in (S_unstable, S_high), best Regime-I alternative {best_alt:.4f}, failures {fails}")


def test_11_alt_fixed_points(canonical_demand, canonical_cost):
    d, c = canonical_demand, canonical_cost
    worst, n = 0.0, 0
    for c_l in (0.1, 0.3, 0.6):
        for s_l in np.linspace(0.0, 0.9, 10):
            for p in ld.alt_fixed_points(d, c, float(s_l), c_l):
                worst = max(worst, abs(p.supply - s_l - float(response(d, c, p.supply))))
                n += 1
    base = find_fixed_points(d, c)
    same = ld.alt_fixed_points(d, c, 0.0, 0.2) == base
    record(11, worst <= 1e-9 and same, f"{n} points, max residual {worst:.1e}, s_l=0 reproduces baseline exactly: {same}")


def test_12_agent_consistency(canonical_demand, canonical_cost, canonical_structure):
    d, c, st = canonical_demand, canonical_cost, canonical_structure
    cases = [(p.supply, 0.0) for p in find_fixed_points(d, c)]
    for s_l in (0.1, 0.5, 0.8, 0.97):
        cases += [(o.supply, s_l) for o in correspondence(st, d, c, s_l).outcomes]
    worst, fails = 0.0, []
    for s_star, s_l in cases:
        chk = agent_cutoff_check(d, c, s_star, s_l, n_samples=100_000)
        err = abs(chk.entrant_mass - (s_star - s_l))
        worst = max(worst, err)
        if not chk.passed or err > 1e-4:
            fails.append((s_star, s_l))
    record(12, not fails, f"{len(cases)} outcomes, max entrant-mass error {worst:.1e}, failures {fails}")


def test_13_cli_determinism(tmp_path):
    canon = str(SCENARIOS / "canonical.json")
    t0 = time.perf_counter()
    code_a = run(["report", canon, "--out", str(tmp_path / "a")])
    elapsed = time.perf_counter() - t0
    code_b = run(["report", canon, "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "canonical.report.json").read_bytes()
    b = (tmp_path / "b" / "canonical.report.json").read_bytes()
    doc = json.loads(a)
    ok = (
        code_a == code_b == 0 and a == b and elapsed < 10.0
        and doc["leader"]["s_l_star"] == 1.0 and doc["leader"]["regime"] == "III"
        and doc["leader"]["dominance_margin"] > 0
    )
    record(13, ok, f"byte-identical={a == b}, report in {elapsed:.2f}s")
