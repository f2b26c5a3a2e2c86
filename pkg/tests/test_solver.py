import math
from dataclasses import replace

import numpy as np
import pytest

from otsbound.bounds import naive_bounds, strengthen_bounds
from otsbound.caseio import load_bundled
from otsbound.errors import InvalidArgument
from otsbound.formulation import build_bigm
from otsbound.generate import random_network
from otsbound.model import ModelBuilder, Sense, VarKind, relax
from otsbound.network import scale_loads
from otsbound.oracle import enumerate_solve, topology_model
from otsbound.solver import SolverConfig, Status, relative_gap, solve_lp, solve_mip

EXACT = SolverConfig(gap_tolerance_percent=1e-4)


@pytest.fixture(scope="module")
def six():
    return load_bundled("six_bus").network


def test_relative_gap():
    assert relative_gap(100.0, 99.0) == 1.0
    assert relative_gap(42.0, 42.0) == 0.0
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(0.0, -1.0) == math.inf
    assert relative_gap(-100.0, -101.0) == 1.0
    assert relative_gap(math.inf, 5.0) == math.inf


def test_config_validation():
    with pytest.raises(InvalidArgument):
        SolverConfig(gap_tolerance_percent=0)
    with pytest.raises(InvalidArgument):
        SolverConfig(lp_kernel="cplex")
    with pytest.raises(InvalidArgument):
        SolverConfig(node_selection="depth-first")


def test_solve_lp_rejects_binaries(six):
    with pytest.raises(InvalidArgument):
        solve_lp(build_bigm(six, strengthen_bounds(six))[0])


def test_zero_binaries_matches_solve_lp(six):
    model = topology_model(six, {3: True, 6: True, 7: False})
    lp, mip = solve_lp(model), solve_mip(model)
    assert mip.node_count == 1 and mip.status is Status.OPTIMAL
    assert mip.objective == pytest.approx(lp.objective, rel=1e-12)


def test_six_bus_matches_oracle(six):
    mip = solve_mip(build_bigm(six, strengthen_bounds(six))[0], EXACT)
    assert mip.objective == pytest.approx(4498.0, rel=1e-6)
    assert mip.objective == pytest.approx(enumerate_solve(six).objective, rel=1e-6)


def test_all_switches_forced_on_equals_full_dc_opf(six):
    forced = replace(six, r=3)
    mip = solve_mip(build_bigm(forced, strengthen_bounds(forced))[0], EXACT)
    full = solve_lp(topology_model(six, {3: True, 6: True, 7: True}))
    assert mip.objective == pytest.approx(full.objective, rel=1e-9)
    assert all(mip.values[f"x_{lid}"] == pytest.approx(1.0) for lid in six.flexible_ids)


def _check_solution(model, sol, tol=1e-6):
    x = np.array([sol.values[v.name] for v in model.variables])
    for v, val in zip(model.variables, x):
        assert v.lower - tol <= val <= v.upper + tol
        if v.kind is VarKind.BINARY:
            assert min(abs(val), abs(val - 1)) <= 1e-6
    for con in model.constraints:
        lhs = sum(c * x[k] for k, c in con.coefficients)
        scale = max(1.0, abs(con.rhs))
        if con.sense is Sense.LE:
            assert lhs <= con.rhs + tol * scale
        elif con.sense is Sense.GE:
            assert lhs >= con.rhs - tol * scale
        else:
            assert abs(lhs - con.rhs) <= tol * scale
    assert sol.objective == pytest.approx(model.evaluate(x), rel=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4, 5])
def test_solution_invariants_and_trace(seed):
    cost = ["linear", "quadratic", "mixed"][seed % 3]
    net = random_network(seed, 7 + seed, 4 + seed % 3, cost=cost, r=seed % 2)
    model, _ = build_bigm(net, naive_bounds(net), "quad-modified" if cost != "linear" else "linear")
    sol = solve_mip(model)
    assert sol.status is Status.OPTIMAL and sol.gap_percent <= 0.1
    assert sol.best_bound <= sol.objective + 1e-9 * abs(sol.objective)
    _check_solution(model, sol)
    lbs = [lb for lb, _ in sol.trace]
    ubs = [ub for _, ub in sol.trace]
    assert all(b >= a for a, b in zip(lbs, lbs[1:]))
    assert all(b <= a for a, b in zip(ubs, ubs[1:]))
    for p, t in model.epigraph_terms:
        v = model.variables
        assert sol.values[v[p].name] ** 2 - sol.values[v[t].name] <= 1e-6
    again = solve_mip(model)
    assert (again.node_count, again.objective) == (sol.node_count, sol.objective)


def test_gap_threshold_respected():
    net = random_network(12, 9, 9)
    model, _ = build_bigm(net, naive_bounds(net))
    loose = solve_mip(model, SolverConfig(gap_tolerance_percent=5.0))
    tight = solve_mip(model, EXACT)
    assert loose.gap_percent <= 5.0 and tight.gap_percent <= 1e-4
    assert loose.node_count <= tight.node_count
    assert tight.objective <= loose.objective + 1e-9


def test_time_limit_without_incumbent(six):
    sol = solve_mip(build_bigm(six, strengthen_bounds(six))[0], SolverConfig(time_limit=1e-12))
    assert sol.status is Status.TIME_LIMIT and not sol.has_incumbent
    assert sol.objective == math.inf


def test_infeasible_case(six):
    heavy = scale_loads(six, 3.0)
    sol = solve_mip(build_bigm(heavy, strengthen_bounds(heavy))[0])
    assert sol.status is Status.INFEASIBLE and not sol.has_incumbent


def test_unbounded_lp():
    mb = ModelBuilder("ray")
    x = mb.add_var("x")
    mb.add_cost(x, 1.0)
    assert solve_lp(mb.build()).status is Status.UNBOUNDED


def test_kernels_agree():
    net = random_network(7, 10, 5, cost="mixed", r=2)
    model, _ = build_bigm(net, strengthen_bounds(net), "quad-direct")
    a = solve_mip(model, EXACT)
    b = solve_mip(model, replace(EXACT, lp_kernel="highs"))
    assert a.objective == pytest.approx(b.objective, rel=1e-6)
    r = relax(model)
    assert solve_lp(r).objective == pytest.approx(solve_lp(r, replace(EXACT, lp_kernel="highs")).objective,
                                                  rel=1e-7)
