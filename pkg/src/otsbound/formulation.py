"""Big-M and McCormick linearisations of DC optimal transmission switching.

Variable layout and names: ``th_<bus>``, ``f_<line>``, ``x_<line>`` (one per
flexible line), ``p_<gen>`` and, for the quadratic cost modes, ``t_<gen>``.
Demands and flows are in MW and susceptances in per-unit, so an angle
variable carries MW per unit susceptance; nothing is rescaled by base MVA.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .bounds import BoundSet
from .errors import CostKindMismatch, IncompleteBounds
from .model import MipModel, ModelBuilder, Sense, VarKind
from .network import CostKind, Network


class CostMode(str, Enum):
    LINEAR = "linear"
    QUADRATIC_DIRECT = "quad-direct"
    QUADRATIC_MODIFIED = "quad-modified"

    @property
    def quadratic(self) -> bool:
        return self is not CostMode.LINEAR


def default_cost_mode(network: Network) -> CostMode:
    if any(g.cost.kind is CostKind.QUADRATIC for g in network.generators):
        return CostMode.QUADRATIC_MODIFIED
    return CostMode.LINEAR


@dataclass(frozen=True)
class VariableMap:
    angle: dict[int, int] = field(default_factory=dict)
    flow: dict[int, int] = field(default_factory=dict)
    status: dict[int, int] = field(default_factory=dict)
    production: dict[int, int] = field(default_factory=dict)
    epigraph: dict[int, int] = field(default_factory=dict)

    def angle_of(self, bus: int) -> int:
        return self.angle[bus]

    def flow_of(self, line: int) -> int:
        return self.flow[line]

    def status_of(self, line: int) -> int:
        return self.status[line]

    def production_of(self, gen: int) -> int:
        return self.production[gen]

    def epigraph_of(self, gen: int) -> int | None:
        return self.epigraph.get(gen)


def reference_bus(network: Network) -> int:
    """Lowest-id bus hosting a generator (bus 1 when there are none)."""
    gen_buses = [g.bus for g in network.generators]
    return min(gen_buses) if gen_buses else 1


def _check_cost_mode(network: Network, cost_mode: CostMode) -> None:
    kinds = {g.cost.kind for g in network.generators}
    if cost_mode is CostMode.LINEAR and CostKind.QUADRATIC in kinds:
        raise CostKindMismatch("linear cost mode on a network with quadratic generators")
    if cost_mode.quadratic and CostKind.QUADRATIC not in kinds:
        raise CostKindMismatch(f"{cost_mode.value} needs at least one quadratic generator")


def _common(network: Network, cost_mode: CostMode, name: str):
    """Variables, bounds, balance rows, fixed-line rows, cardinality and objective."""
    cost_mode = CostMode(cost_mode)
    _check_cost_mode(network, cost_mode)
    mb = ModelBuilder(name)
    vm = VariableMap()
    ref = reference_bus(network)
    for bus in network.buses:
        if bus.id == ref:
            vm.angle[bus.id] = mb.add_var(f"th_{bus.id}", lower=0.0, upper=0.0)
        else:
            vm.angle[bus.id] = mb.add_var(f"th_{bus.id}")
    for ln in network.lines:
        vm.flow[ln.id] = mb.add_var(f"f_{ln.id}", lower=-ln.capacity, upper=ln.capacity)
    for ln in network.flexible_lines:
        vm.status[ln.id] = mb.add_var(f"x_{ln.id}", VarKind.BINARY, 0.0, 1.0)
    for g in network.generators:
        vm.production[g.id] = mb.add_var(f"p_{g.id}", lower=g.p_min, upper=g.p_max)
    if cost_mode.quadratic:
        for g in network.generators:
            # t >= p**2 >= 0 holds for every feasible point
            vm.epigraph[g.id] = mb.add_var(f"t_{g.id}", lower=0.0)
            mb.epigraph.append((vm.production[g.id], vm.epigraph[g.id]))

    # power balance: sum(p) - d = sum(out flows) - sum(in flows)
    rows: dict[int, dict[int, float]] = {b.id: {} for b in network.buses}
    for g in network.generators:
        row = rows[g.bus]
        row[vm.production[g.id]] = row.get(vm.production[g.id], 0.0) + 1.0
    for ln in network.lines:
        f = vm.flow[ln.id]
        rows[ln.from_bus][f] = rows[ln.from_bus].get(f, 0.0) - 1.0
        rows[ln.to_bus][f] = rows[ln.to_bus].get(f, 0.0) + 1.0
    for bus in network.buses:
        mb.add_row(f"bal_{bus.id}", rows[bus.id], Sense.EQ, bus.demand)

    for ln in network.fixed_lines:
        B = ln.susceptance
        mb.add_row(f"dc_{ln.id}", {vm.flow[ln.id]: 1.0, vm.angle[ln.from_bus]: -B,
                                   vm.angle[ln.to_bus]: B}, Sense.EQ, 0.0)

    if vm.status:
        mb.add_row("card", {k: 1.0 for k in vm.status.values()}, Sense.GE, network.r)

    for g in network.generators:
        mb.add_cost(vm.production[g.id], g.cost.b)
        mb.constant += g.cost.c
        if cost_mode.quadratic:
            mb.add_cost(vm.epigraph[g.id], g.cost.a)
    return mb, vm


def _bounds_for(bounds: BoundSet, network: Network):
    missing = [ln.id for ln in network.flexible_lines if ln.id not in bounds.entries]
    if missing:
        raise IncompleteBounds(f"no bounds for flexible lines {missing}")
    return bounds.entries


def build_bigm(network: Network, bounds: BoundSet,
               cost_mode: CostMode = CostMode.LINEAR) -> tuple[MipModel, VariableMap]:
    """OTS with the switched DC equation written as a big-M inequality pair."""
    entries = _bounds_for(bounds, network)
    mb, vm = _common(network, cost_mode, "ots_bigm")
    for ln in network.flexible_lines:
        f, x = vm.flow[ln.id], vm.status[ln.id]
        B, M, fmax = ln.susceptance, entries[ln.id].big_m, ln.capacity
        ti, tj = vm.angle[ln.from_bus], vm.angle[ln.to_bus]
        mb.add_row(f"cu_{ln.id}", {f: 1.0, x: -fmax}, Sense.LE, 0.0)
        mb.add_row(f"cl_{ln.id}", {f: 1.0, x: fmax}, Sense.GE, 0.0)
        # B*(ti - tj) - M*(1 - x) <= f <= B*(ti - tj) + M*(1 - x)
        mb.add_row(f"mu_{ln.id}", {f: 1.0, ti: -B, tj: B, x: M}, Sense.LE, M)
        mb.add_row(f"ml_{ln.id}", {f: 1.0, ti: -B, tj: B, x: -M}, Sense.GE, -M)
    return mb.build(), vm


def build_mccormick(network: Network, bounds: BoundSet,
                    cost_mode: CostMode = CostMode.LINEAR) -> tuple[MipModel, VariableMap]:
    """OTS with the bilinear term ``x * B * (ti - tj)`` replaced by its McCormick envelope.

    With ``y = B * (ti - tj)`` the rows are ``l1*x <= f <= u1*x`` and
    ``y - u0*(1 - x) <= f <= y - l0*(1 - x)``.
    """
    entries = _bounds_for(bounds, network)
    mb, vm = _common(network, cost_mode, "ots_mccormick")
    for ln in network.flexible_lines:
        e = entries[ln.id]
        if None in (e.u0, e.l0, e.u1, e.l1):
            raise IncompleteBounds(f"line {ln.id} lacks McCormick bounds")
        f, x = vm.flow[ln.id], vm.status[ln.id]
        B = ln.susceptance
        ti, tj = vm.angle[ln.from_bus], vm.angle[ln.to_bus]
        mb.add_row(f"mc1_{ln.id}", {f: 1.0, x: -e.u1}, Sense.LE, 0.0)
        mb.add_row(f"mc2_{ln.id}", {f: 1.0, x: -e.l1}, Sense.GE, 0.0)
        mb.add_row(f"mc3_{ln.id}", {f: 1.0, ti: -B, tj: B, x: -e.l0}, Sense.LE, -e.l0)
        mb.add_row(f"mc4_{ln.id}", {f: 1.0, ti: -B, tj: B, x: -e.u0}, Sense.GE, -e.u0)
    return mb.build(), vm


def count_rows(model: MipModel, prefix: str) -> int:
    return sum(1 for c in model.constraints if c.name.startswith(prefix))


