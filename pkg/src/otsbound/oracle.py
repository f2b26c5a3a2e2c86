"""Exhaustive enumeration over switch configurations.

Every admissible configuration is solved as a plain DC-OPF in which
switched-off lines carry zero flow and have no DC equation. No big-M or
McCormick rows are involved, so these results certify the linearised
models rather than reuse them. LPs go through :func:`otsbound.solver.solve_lp`
with the HiGHS kernel by default.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

from .errors import EmptyRestriction, InvalidArgument, TooLarge
from .formulation import CostMode, default_cost_mode
from .model import MipModel, ModelBuilder, Sense
from .network import CostKind, Network
from .solver import Solution, SolverConfig, Status, solve_lp

ORACLE_CONFIG = SolverConfig(lp_kernel="highs")


@dataclass
class OracleSolution(Solution):
    configuration: dict[int, int] | None = None
    feasible_count: int = 0
    examined: int = 0


def topology_model(network: Network, on: dict[int, bool], cost_mode: CostMode | None = None,
                   *, angle_objective: tuple[int, int] | None = None,
                   relaxed_off: dict[int, float] | None = None) -> MipModel:
    """DC-OPF for one configuration; ``on`` maps flexible line id to status.

    ``angle_objective=(a, b)`` replaces the cost by ``max th_a - th_b``.
    ``relaxed_off`` maps off lines to a big-M value: instead of dropping their
    DC equation, ``|B * (th_i - th_j)| <= M`` is imposed.
    """
    relaxed_off = relaxed_off or {}
    quadratic = angle_objective is None and cost_mode is not None and CostMode(cost_mode).quadratic
    if cost_mode is not None and not CostMode(cost_mode).quadratic:
        if any(g.cost.kind is CostKind.QUADRATIC for g in network.generators):
            raise InvalidArgument("linear cost mode with quadratic generators")
    mb = ModelBuilder("topology")
    th = {}
    for bus in network.buses:
        if bus.id == 1:
            th[bus.id] = mb.add_var("th_1", lower=0.0, upper=0.0)
        else:
            th[bus.id] = mb.add_var(f"th_{bus.id}")
    f = {}
    for ln in network.lines:
        live = not ln.flexible or on[ln.id]
        cap = ln.capacity if live else 0.0
        f[ln.id] = mb.add_var(f"f_{ln.id}", lower=-cap, upper=cap)
    p = {g.id: mb.add_var(f"p_{g.id}", lower=g.p_min, upper=g.p_max) for g in network.generators}
    t = {}
    if quadratic:
        for g in network.generators:
            t[g.id] = mb.add_var(f"t_{g.id}", lower=0.0)
            mb.epigraph.append((p[g.id], t[g.id]))

    for bus in network.buses:
        row: dict[int, float] = {}
        for g in network.generators:
            if g.bus == bus.id:
                row[p[g.id]] = row.get(p[g.id], 0.0) + 1.0
        for ln in network.lines:
            if ln.from_bus == bus.id:
                row[f[ln.id]] = row.get(f[ln.id], 0.0) - 1.0
            elif ln.to_bus == bus.id:
                row[f[ln.id]] = row.get(f[ln.id], 0.0) + 1.0
        mb.add_row(f"bal_{bus.id}", row, Sense.EQ, bus.demand)
    for ln in network.lines:
        B, i, j = ln.susceptance, th[ln.from_bus], th[ln.to_bus]
        if not ln.flexible or on[ln.id]:
            mb.add_row(f"dc_{ln.id}", {f[ln.id]: 1.0, i: -B, j: B}, Sense.EQ, 0.0)
        elif ln.id in relaxed_off:
            M = relaxed_off[ln.id]
            mb.add_row(f"rl_{ln.id}", {i: B, j: -B}, Sense.LE, M)
            mb.add_row(f"rg_{ln.id}", {i: B, j: -B}, Sense.GE, -M)

    if angle_objective is None:
        for g in network.generators:
            mb.add_cost(p[g.id], g.cost.b)
            mb.constant += g.cost.c
            if quadratic:
                mb.add_cost(t[g.id], g.cost.a)
    else:
        a, b = angle_objective
        mb.add_cost(th[a], -1.0)
        mb.add_cost(th[b], 1.0)
    return mb.build()


def _configurations(network: Network, limit: int, forced_off: int | None = None):
    flex = list(network.flexible_ids)
    if len(flex) > limit:
        raise TooLarge(f"{len(flex)} flexible lines exceed the enumeration limit {limit}")
    for bits in itertools.product((0, 1), repeat=len(flex)):
        status = dict(zip(flex, bits))
        if forced_off is not None and status[forced_off]:
            continue
        if sum(bits) >= network.r:
            yield status


def enumerate_solve(network: Network, cost_mode: CostMode | None = None, limit: int = 20,
                    config: SolverConfig | None = None) -> OracleSolution:
    """Globally optimal OTS by solving every configuration with at least ``r`` lines on."""
    config = config or ORACLE_CONFIG
    cost_mode = CostMode(cost_mode) if cost_mode is not None else default_cost_mode(network)
    start = time.perf_counter()
    best: Solution | None = None
    best_cfg = None
    feasible = examined = lps = 0
    for status in _configurations(network, limit):
        examined += 1
        sol = solve_lp(topology_model(network, status, cost_mode), config)
        lps += sol.lp_count
        if sol.status is not Status.OPTIMAL:
            continue
        feasible += 1
        if best is None or sol.objective < best.objective:
            best, best_cfg = sol, status
    wall = time.perf_counter() - start
    if best is None:
        return OracleSolution(Status.INFEASIBLE, math.inf, math.inf, math.inf, node_count=0,
                              wall_time=wall, lp_count=lps, feasible_count=0, examined=examined)
    values = dict(best.values)
    for lid, bit in best_cfg.items():
        values[f"x_{lid}"] = float(bit)
    return OracleSolution(Status.OPTIMAL, best.objective, best.objective, 0.0, values,
                          node_count=examined, wall_time=wall, lp_count=lps,
                          configuration=best_cfg, feasible_count=feasible, examined=examined)


def angle_difference_range(network: Network, line_id: int, limit: int = 16,
                           bounds=None, config: SolverConfig | None = None) -> tuple[float, float]:
    """``(min, max)`` of ``th_i - th_j`` over feasible points with the line switched off.

    With ``bounds`` (a :class:`~otsbound.bounds.BoundSet`), the other
    switched-off lines keep their big-M rows ``|B * (th_i - th_j)| <= M``
    instead of losing the DC equation outright.
    """
    config = config or ORACLE_CONFIG
    line = network.line(line_id)
    if not line.flexible:
        raise InvalidArgument(f"line {line_id} is not flexible")
    i, j = line.from_bus, line.to_bus
    hi = lo = None
    for status in _configurations(network, limit, forced_off=line_id):
        relaxed = None
        if bounds is not None:
            relaxed = {lid: bounds.big_m(lid) for lid, bit in status.items()
                       if not bit and lid != line_id}
        up = solve_lp(topology_model(network, status, angle_objective=(i, j),
                                     relaxed_off=relaxed), config)
        if up.status is Status.INFEASIBLE:
            continue
        if up.status is Status.UNBOUNDED:
            return -math.inf, math.inf
        down = solve_lp(topology_model(network, status, angle_objective=(j, i),
                                       relaxed_off=relaxed), config)
        if down.status is Status.UNBOUNDED:
            return -math.inf, math.inf
        d_up = up.values[f"th_{i}"] - up.values[f"th_{j}"]
        d_down = down.values[f"th_{i}"] - down.values[f"th_{j}"]
        hi = d_up if hi is None else max(hi, d_up)
        lo = d_down if lo is None else min(lo, d_down)
    if hi is None:
        raise EmptyRestriction(f"no feasible point has line {line_id} switched off")
    return lo, hi


def max_angle_difference(network: Network, line_id: int, limit: int = 16,
                         bounds=None, config: SolverConfig | None = None) -> float:
    """Largest ``|th_i - th_j|`` with the line switched off; ``inf`` if unbounded."""
    lo, hi = angle_difference_range(network, line_id, limit, bounds, config)
    return max(hi, -lo)
