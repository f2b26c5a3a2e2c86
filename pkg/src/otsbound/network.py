"""Power network domain types and structural validation.

All types are frozen dataclasses; a :class:`Network` never changes after
construction and helpers such as :func:`scale_loads` return new objects.
Demands, generation limits and line capacities are in MW; susceptances are
in per-unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

from .errors import InvalidArgument


class CostKind(str, Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class CostFunction:
    """Generator cost ``a*p**2 + b*p + c`` ($/h with p in MW)."""

    kind: CostKind = CostKind.LINEAR
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    @classmethod
    def linear(cls, b: float, c: float = 0.0) -> CostFunction:
        return cls(CostKind.LINEAR, 0.0, float(b), float(c))

    @classmethod
    def quadratic(cls, a: float, b: float, c: float = 0.0) -> CostFunction:
        return cls(CostKind.QUADRATIC, float(a), float(b), float(c))

    def __call__(self, p: float) -> float:
        return self.a * p * p + self.b * p + self.c


@dataclass(frozen=True)
class Bus:
    id: int
    demand: float = 0.0


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    p_min: float
    p_max: float
    cost: CostFunction = field(default_factory=CostFunction)


@dataclass(frozen=True)
class Line:
    """A directed transmission line ``from_bus -> to_bus``.

    The orientation is arbitrary but fixed once the line is created; positive
    flow runs from ``from_bus`` to ``to_bus``.
    """

    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    capacity: float
    flexible: bool = False

    @property
    def weight(self) -> float:
        """Largest angle difference the line tolerates, ``capacity / susceptance``."""
        return self.capacity / self.susceptance


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    r: int = 0

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "lines", tuple(self.lines))

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def flexible_lines(self) -> tuple[Line, ...]:
        return tuple(ln for ln in self.lines if ln.flexible)

    @property
    def fixed_lines(self) -> tuple[Line, ...]:
        return tuple(ln for ln in self.lines if not ln.flexible)

    @property
    def flexible_ids(self) -> tuple[int, ...]:
        return tuple(ln.id for ln in self.lines if ln.flexible)

    @cached_property
    def _line_index(self) -> dict[int, Line]:
        return {ln.id: ln for ln in self.lines}

    def line(self, line_id: int) -> Line:
        try:
            return self._line_index[line_id]
        except KeyError:
            raise InvalidArgument(f"no line with id {line_id}") from None

    @property
    def total_demand(self) -> float:
        return sum(b.demand for b in self.buses)

    def with_flexible(self, flexible_ids, r: int | None = None) -> Network:
        """Copy with exactly ``flexible_ids`` marked flexible."""
        ids = set(flexible_ids)
        lines = tuple(replace(ln, flexible=ln.id in ids) for ln in self.lines)
        return replace(self, lines=lines, r=self.r if r is None else r)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: int | None = None
    message: str = ""


def validate(network: Network) -> list[Violation]:
    """Return every structural invariant violation; an empty list means valid.

    Spanning connectivity of the fixed lines is not checked here, see
    :func:`otsbound.graph.is_spanning_connected`.
    """
    out: list[Violation] = []
    ids = [b.id for b in network.buses]
    if len(set(ids)) != len(ids):
        out.append(Violation("DuplicateBusId", None, "bus ids are not unique"))
    if sorted(ids) != list(range(1, len(ids) + 1)):
        out.append(Violation("NonContiguousBusIds", None, "bus ids must be 1..n_b"))
    known = set(ids)
    for b in network.buses:
        if not math.isfinite(b.demand):
            out.append(Violation("NonFiniteDemand", b.id, f"bus {b.id} demand is not finite"))

    gen_ids = [g.id for g in network.generators]
    if len(set(gen_ids)) != len(gen_ids):
        out.append(Violation("DuplicateGeneratorId", None, "generator ids are not unique"))
    for g in network.generators:
        if g.bus not in known:
            out.append(Violation("UnknownGeneratorBus", g.id, f"generator {g.id} at unknown bus {g.bus}"))
        if not g.p_min <= g.p_max:
            out.append(Violation("InvalidGeneratorLimits", g.id, f"generator {g.id} has p_min > p_max"))
        cost = g.cost
        if min(cost.a, cost.b, cost.c) < 0:
            out.append(Violation("NegativeCostCoefficient", g.id, f"generator {g.id} cost has a negative coefficient"))
        if cost.kind is CostKind.QUADRATIC and cost.a == 0:
            out.append(Violation("ZeroQuadraticCoefficient", g.id, f"generator {g.id} is quadratic with a = 0"))
        if cost.kind is CostKind.LINEAR and cost.a != 0:
            out.append(Violation("LinearCostWithQuadraticTerm", g.id, f"generator {g.id} is linear with a != 0"))

    line_ids = [ln.id for ln in network.lines]
    if len(set(line_ids)) != len(line_ids):
        out.append(Violation("DuplicateLineId", None, "line ids are not unique"))
    for ln in network.lines:
        if ln.from_bus not in known or ln.to_bus not in known:
            out.append(Violation("DanglingEndpoint", ln.id, f"line {ln.id} references an unknown bus"))
        if ln.from_bus == ln.to_bus:
            out.append(Violation("SelfLoop", ln.id, f"line {ln.id} connects bus {ln.from_bus} to itself"))
        if not ln.susceptance > 0:
            out.append(Violation("NonPositiveSusceptance", ln.id, f"line {ln.id} susceptance must be > 0"))
        if not ln.capacity > 0:
            out.append(Violation("NonPositiveCapacity", ln.id, f"line {ln.id} capacity must be > 0"))

    if network.r < 0:
        out.append(Violation("NegativeCardinalityBound", None, "r must be non-negative"))
    n_s = len(network.flexible_lines)
    if network.r > n_s:
        out.append(Violation("CardinalityBoundExceedsFlexibleCount", None,
                             f"r = {network.r} exceeds the {n_s} flexible lines"))
    return out


def scale_loads(network: Network, alpha: float) -> Network:
    """Multiply every bus demand by ``alpha``."""
    if not alpha > 0:
        raise InvalidArgument(f"load factor must be positive, got {alpha}")
    buses = tuple(replace(b, demand=alpha * b.demand) for b in network.buses)
    return replace(network, buses=buses)
