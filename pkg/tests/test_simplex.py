import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from otsbound import simplex
from otsbound.model import ModelBuilder, Sense
from otsbound.solver import Status, solve_lp


def test_single_bounded_variable():
    mb = ModelBuilder("box")
    p = mb.add_var("p", lower=1.0, upper=2.0)
    mb.add_cost(p, 1.0)
    sol = solve_lp(mb.build())
    assert sol.status is Status.OPTIMAL and sol.objective == 1.0 and sol.node_count == 1


def test_two_bus_dc_opf():
    mb = ModelBuilder("dcopf")
    th1 = mb.add_var("th_1", lower=0.0, upper=0.0)
    th2 = mb.add_var("th_2")
    f = mb.add_var("f_1", lower=-10.0, upper=10.0)
    p = mb.add_var("p_1", lower=0.0, upper=5.0)
    mb.add_row("bal_1", {p: 1.0, f: -1.0}, Sense.EQ, 0.0)
    mb.add_row("bal_2", {f: 1.0}, Sense.EQ, 3.0)
    mb.add_row("dc_1", {f: 1.0, th1: -1.0, th2: 1.0}, Sense.EQ, 0.0)
    mb.add_cost(p, 1.0)
    sol = solve_lp(mb.build())
    v = sol.values
    assert sol.objective == pytest.approx(3.0)
    assert v["p_1"] == pytest.approx(3.0) and v["f_1"] == pytest.approx(3.0)
    assert v["th_1"] - v["th_2"] == pytest.approx(3.0)


def test_epigraph_converges_to_square():
    mb = ModelBuilder("epi")
    p = mb.add_var("p", lower=2.0, upper=2.0)
    t = mb.add_var("t", lower=0.0)
    mb.epigraph.append((p, t))
    mb.add_cost(t, 1.0)
    sol = solve_lp(mb.build())
    assert abs(sol.values["t"] - 4.0) <= 1e-6


def test_epigraph_interior_minimum():
    # min t - 3p with p**2 <= t has its minimum at p = 1.5
    mb = ModelBuilder("epi")
    p = mb.add_var("p", lower=-10.0, upper=10.0)
    t = mb.add_var("t", lower=0.0)
    mb.epigraph.append((p, t))
    mb.add_cost(t, 1.0)
    mb.add_cost(p, -3.0)
    sol = solve_lp(mb.build())
    assert sol.objective == pytest.approx(-2.25, abs=1e-6)
    assert sol.values["p"] ** 2 - sol.values["t"] <= 1e-6


def test_infeasible_and_unbounded():
    A = np.array([[1.0, 1.0]])
    res = simplex.solve([1, 1], A, [5.0], [0, 0], [1, 1])
    assert res.status == simplex.INFEASIBLE
    res = simplex.solve([-1, 0], A, [5.0], [-math.inf, -math.inf], [math.inf, math.inf])
    assert res.status == simplex.UNBOUNDED
    res = simplex.solve([1, 1], A, [1.0], [1, 1], [0, 0])
    assert res.status == simplex.INFEASIBLE


def test_beale_cycling_example_terminates():
    # Beale's example cycles under textbook Dantzig pricing without anti-cycling
    c = np.array([-0.75, 150, -0.02, 6, 0, 0, 0])
    A = np.array([[0.25, -60, -0.04, 9, 1, 0, 0],
                  [0.5, -90, -0.02, 3, 0, 1, 0],
                  [0, 0, 1, 0, 0, 0, 1]], dtype=float)
    b = np.array([0.0, 0.0, 1.0])
    lo = np.zeros(7)
    up = np.full(7, math.inf)
    res = simplex.solve(c, A, b, lo, up, basis=[4, 5, 6])
    assert res.status == simplex.OPTIMAL
    assert res.objective == pytest.approx(-0.05)


def _highs(c, A, b, lo, up):
    bounds = [(None if not np.isfinite(a) else a, None if not np.isfinite(z) else z)
              for a, z in zip(lo, up)]
    res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    return {0: simplex.OPTIMAL, 2: simplex.INFEASIBLE, 3: simplex.UNBOUNDED}[res.status], res.fun


@st.composite
def random_lp(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 12)), int(rng.integers(1, 16))
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < 0.6)
    b = rng.normal(size=m) * 3
    lo = np.where(rng.random(n) < 0.2, -np.inf, -rng.random(n) * 5)
    up = np.where(rng.random(n) < 0.2, np.inf, rng.random(n) * 5)
    c = rng.normal(size=n)
    # one slack per row: <=, >= or = at random
    kind = rng.integers(0, 3, size=m)
    slo = np.where(kind == 1, -np.inf, 0.0)
    sup = np.where(kind == 0, np.inf, 0.0)
    return (np.concatenate([c, np.zeros(m)]), np.hstack([A, np.eye(m)]), b,
            np.concatenate([lo, slo]), np.concatenate([up, sup]), n)


@settings(max_examples=150, deadline=None)
@given(random_lp())
def test_matches_highs(lp):
    c, A, b, lo, up, n = lp
    m = A.shape[0]
    ref_status, ref_obj = _highs(c, A, b, lo, up)
    for basis in (None, np.arange(n, n + m)):
        res = simplex.solve(c, A, b, lo, up, basis=basis)
        assert res.status == ref_status
        if ref_status == simplex.OPTIMAL:
            assert res.objective == pytest.approx(ref_obj, rel=1e-6, abs=1e-6)
            assert np.abs(A @ res.x - b).max() <= 1e-6
            assert np.all(res.x >= lo - 1e-7) and np.all(res.x <= up + 1e-7)


@settings(max_examples=100, deadline=None)
@given(random_lp(), st.integers(0, 10_000))
def test_warm_start_after_bound_change(lp, seed):
    c, A, b, lo, up, n = lp
    m = A.shape[0]
    first = simplex.solve(c, A, b, lo, up, basis=np.arange(n, n + m))
    if first.status != simplex.OPTIMAL:
        return
    rng = np.random.default_rng(seed)
    j = int(rng.integers(n))
    up2 = up.copy()
    up2[j] = max(lo[j], first.x[j] - 0.5) if np.isfinite(lo[j]) else first.x[j] - 0.5
    ref_status, ref_obj = _highs(c, A, b, lo, up2)
    res = simplex.solve(c, A, b, lo, up2, basis=first.basis, x0=first.x)
    assert res.status == ref_status
    if ref_status == simplex.OPTIMAL:
        assert res.objective == pytest.approx(ref_obj, rel=1e-6, abs=1e-6)
