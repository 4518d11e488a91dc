import numpy as np
import pytest

from coordsolve.equilibrium import Regime, find_fixed_points, response
from coordsolve.errors import CertificateFailure, DomainError
from coordsolve import leader as ld


def test_canonical_solution(canonical_demand, canonical_cost, canonical_structure):
    sol = ld.solve(canonical_demand, canonical_cost, canonical_structure)
    assert sol.s_l_star == 1.0 and sol.regime is Regime.III and sol.boundary_hit
    # P(1,1) = 0.9 and the full stock costs 0.42275
    assert sol.profit == pytest.approx(0.9 - 0.42275, abs=1e-12)
    assert sol.regime2_profit == pytest.approx(ld.whole_market_profit(canonical_cost, canonical_structure.high), abs=1e-9)


def test_regime3_brute_force(corpus):
    for name, (sc, st) in corpus.items():
        sol = ld.solve(sc.demand, sc.cost, st)
        grid = np.linspace(st.high, 1.0, 2001)
        brute = max(ld.regime3_profit(sc.demand, sc.cost, float(x)) for x in grid)
        best = max(brute, ld.leader_profit(sc.demand, sc.cost, st.high, st.high))
        assert sol.profit >= best - 1e-9, name


def test_interior_regime3_foc(corpus):
    sc, st = corpus["steep_tail"]
    sol = ld.solve(sc.demand, sc.cost, st)
    assert sol.regime is Regime.III and not sol.boundary_hit
    assert abs(sol.foc_residual) < 1e-6


def test_dominance_certificate_fails_for_bad_claim(canonical_demand, canonical_cost, canonical_structure):
    sol = ld.solve(canonical_demand, canonical_cost, canonical_structure)
    weak = ld.LeaderSolution(0.1, Regime.I, -1.0, 0.1, False, 0.0, 0.0)
    with pytest.raises(CertificateFailure):
        ld.verify_dominance(canonical_demand, canonical_cost, canonical_structure, weak)
    cert = ld.verify_dominance(canonical_demand, canonical_cost, canonical_structure, sol)
    assert cert.valid and len(cert.deviation_grid) == 500


def test_whole_market_slope_fd(canonical_cost):
    h = 1e-7
    for s in np.linspace(0.01, 0.99, 50):
        c = float(canonical_cost.quantile(s))
        if canonical_cost.near_knot(c, 1e-5):
            continue
        fd = (ld.whole_market_profit(canonical_cost, s + h) - ld.whole_market_profit(canonical_cost, s - h)) / (2 * h)
        assert fd == pytest.approx(ld.whole_market_profit_slope(canonical_cost, s), rel=1e-5)
    with pytest.raises(DomainError):
        ld.whole_market_profit_slope(canonical_cost, float(canonical_cost.cdf(0.35)))


def test_expansion_sign(canonical_demand, canonical_structure):
    e = ld.expansion_condition(canonical_demand, canonical_structure)
    assert e.holds and e.index == pytest.approx(3.0 * canonical_structure.high)


def test_weak_network_stays_at_high(corpus):
    sc, st = corpus["weak_network"]
    assert not ld.expansion_condition(sc.demand, st).holds
    sol = ld.solve(sc.demand, sc.cost, st)
    assert sol.regime is Regime.II and sol.s_l_star == st.high


def test_capacity(canonical_demand, canonical_cost, canonical_structure):
    st = canonical_structure
    free = ld.solve_with_capacity(canonical_demand, canonical_cost, st, 1.0)
    assert not free.binding and free.s_l_star == 1.0
    mid = ld.solve_with_capacity(canonical_demand, canonical_cost, st, 0.8)
    assert mid.s_l_star == 0.8 and mid.total_supply == st.high and mid.regime is Regime.II
    # below the unstable point the commitment can be trapped, so the
    # worst-case choice retreats while the optimistic value is still reported
    low = ld.solve_with_capacity(canonical_demand, canonical_cost, st, 0.4)
    assert low.profit < low.optimistic_profit
    assert low.optimistic_supply == st.high


def test_alt_fixed_points(canonical_demand, canonical_cost):
    base = find_fixed_points(canonical_demand, canonical_cost, 20000)
    alt0 = ld.alt_fixed_points(canonical_demand, canonical_cost, 0.0, 0.2, 20000)
    assert [p.supply for p in alt0] == [p.supply for p in base]
    pts = ld.alt_fixed_points(canonical_demand, canonical_cost, 0.3, 0.2)
    for p in pts:
        assert abs(p.supply - 0.3 - float(response(canonical_demand, canonical_cost, p.supply))) <= 1e-9
    assert pts[-1].supply == pytest.approx(1.3)
    with pytest.raises(DomainError):
        ld.alt_fixed_points(canonical_demand, canonical_cost, 0.3, 0.0)


def test_alt_scan_rows(canonical_demand, canonical_cost):
    rows = ld.alt_leader_scan(canonical_demand, canonical_cost, 0.3, n_grid=11)
    assert len(rows) == 11
    assert all(r.worst_profit <= r.best_profit for r in rows)
