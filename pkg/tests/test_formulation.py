import pytest

from otsbound.bounds import mccormick_from_bigm, naive_bounds, strengthen_bounds
from otsbound.caseio import load_bundled
from otsbound.errors import CostKindMismatch, IncompleteBounds
from otsbound.formulation import (CostMode, build_bigm, build_mccormick, count_rows,
                                  default_cost_mode, reference_bus)
from otsbound.generate import random_network
from otsbound.model import Sense, VarKind, relax
from otsbound.bounds import BoundSet, Provenance
from otsbound.solver import SolverConfig, solve_lp, solve_mip


@pytest.fixture(scope="module")
def six():
    return load_bundled("six_bus").network


def test_six_bus_counts(six):
    model, vm = build_bigm(six, strengthen_bounds(six))
    assert len(model.variables) == 6 + 8 + 3 + len(six.generators)
    assert count_rows(model, "mu_") + count_rows(model, "ml_") == 6
    assert len(model.binary_indices) == 3
    assert model.variables[vm.status_of(3)].name == "x_3"
    assert vm.epigraph_of(1) is None


def test_quadratic_adds_one_t_per_generator():
    net = random_network(3, 6, 3, cost="quadratic")
    model, vm = build_bigm(net, strengthen_bounds(net), CostMode.QUADRATIC_MODIFIED)
    n = net.n_buses + len(net.lines) + len(net.flexible_lines) + 2 * len(net.generators)
    assert len(model.variables) == n
    assert len(model.epigraph_terms) == len(net.generators)
    g = net.generators[0]
    coef = dict(model.objective)
    assert coef[vm.epigraph_of(g.id)] == g.cost.a and coef[vm.production_of(g.id)] == g.cost.b


def test_no_flexible_lines_is_plain_dc_opf(six):
    net = six.with_flexible([], r=0)
    model, _ = build_bigm(net, BoundSet(Provenance.SHORTEST_PATH))
    assert model.binary_indices == []
    assert count_rows(model, "mu_") == 0 and count_rows(model, "card") == 0


def test_reference_bus_and_row_shapes(six):
    model, vm = build_bigm(six, strengthen_bounds(six))
    ref = reference_bus(six)
    assert ref == 1
    th = model.variables[vm.angle_of(ref)]
    assert (th.lower, th.upper) == (0.0, 0.0)
    mu = model.constraint("mu_3")
    assert mu.sense is Sense.LE and mu.rhs == 150.0
    assert dict(mu.coefficients)[vm.status_of(3)] == 150.0
    card = model.constraint("card")
    assert card.sense is Sense.GE and card.rhs == six.r
    f1 = model.variables[vm.flow_of(1)]
    assert (f1.lower, f1.upper) == (-150.0, 150.0)
    assert model.variables[vm.status_of(3)].kind is VarKind.BINARY


def test_balance_rows_telescope(six):
    model, vm = build_bigm(six, strengthen_bounds(six))
    total = {}
    for bus in six.buses:
        for k, c in model.constraint(f"bal_{bus.id}").coefficients:
            total[k] = total.get(k, 0.0) + c
    # flows cancel; only productions remain, summing to total demand
    assert {k: c for k, c in total.items() if c} == {vm.production_of(g.id): 1.0 for g in six.generators}
    assert sum(model.constraint(f"bal_{b.id}").rhs for b in six.buses) == six.total_demand


def test_mccormick_row_count(six):
    model, _ = build_mccormick(six, mccormick_from_bigm(strengthen_bounds(six), six))
    assert count_rows(model, "mc") == 12
    assert count_rows(model, "mu_") == 0


def test_mccormick_equals_bigm_on_six_bus(six):
    b = strengthen_bounds(six)
    z1 = solve_mip(build_bigm(six, b)[0], SolverConfig(gap_tolerance_percent=1e-4)).objective
    z2 = solve_mip(build_mccormick(six, mccormick_from_bigm(b, six))[0],
                   SolverConfig(gap_tolerance_percent=1e-4)).objective
    assert z1 == pytest.approx(z2, rel=1e-6)


def test_mccormick_matches_bigm_set_at_binary_points(six):
    # with u0 = -l0 = M and u1 = -l1 = fmax the two row sets coincide at x in {0, 1}
    b = strengthen_bounds(six)
    bm, _ = build_bigm(six, b)
    mc, _ = build_mccormick(six, mccormick_from_bigm(b, six))
    import numpy as np
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.normal(scale=100, size=len(bm.variables))
        for k in bm.binary_indices:
            x[k] = float(rng.integers(0, 2))

        def feasible(model, prefixes):
            for con in model.constraints:
                if not con.name.startswith(prefixes):
                    continue
                lhs = sum(c * x[k] for k, c in con.coefficients)
                if con.sense is Sense.LE and lhs > con.rhs + 1e-9:
                    return False
                if con.sense is Sense.GE and lhs < con.rhs - 1e-9:
                    return False
            return True
        assert feasible(bm, ("cu_", "cl_", "mu_", "ml_")) == feasible(mc, ("mc",))


def test_errors(six):
    with pytest.raises(IncompleteBounds):
        build_bigm(six, BoundSet(Provenance.NAIVE))
    with pytest.raises(CostKindMismatch):
        build_bigm(six, strengthen_bounds(six), CostMode.QUADRATIC_DIRECT)
    quad = random_network(3, 6, 3, cost="quadratic")
    with pytest.raises(CostKindMismatch):
        build_bigm(quad, strengthen_bounds(quad), CostMode.LINEAR)
    assert default_cost_mode(quad) is CostMode.QUADRATIC_MODIFIED
    assert default_cost_mode(six) is CostMode.LINEAR


def test_relaxation_bounds(six):
    for bounds in (naive_bounds(six), strengthen_bounds(six)):
        model, _ = build_bigm(six, bounds)
        r = relax(model)
        assert r.binary_indices == [] and relax(r) is r
        assert solve_lp(r).objective <= solve_mip(model).objective + 1e-9
    zn = solve_lp(relax(build_bigm(six, naive_bounds(six))[0])).objective
    zs = solve_lp(relax(build_bigm(six, strengthen_bounds(six))[0])).objective
    assert zs >= zn - 1e-9
    assert zs > zn
