"""Big-M and McCormick bounds for flexible lines.

Three sources are available:

* :func:`naive_bounds` multiplies the line susceptance by the total weight
  ``capacity / susceptance`` of all fixed lines, a value that ignores the
  network structure.
* :func:`strengthen_bounds` multiplies the susceptance by the shortest-path
  distance between the line endpoints through fixed lines only. Any fixed
  path bounds the angle difference, because each fixed line caps its own
  angle difference at its weight.
* :func:`exact_bounds` enumerates switch configurations (exponential; small
  cases only) and returns the smallest valid values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyRestriction, IslandingError, ParseError
from .graph import build_fixed_subgraph, components, is_spanning_connected, shortest_paths
from .network import Network


class Provenance(str, Enum):
    NAIVE = "naive"
    SHORTEST_PATH = "shortest-path"
    EXACT = "exact"


@dataclass(frozen=True)
class LineBounds:
    """Bounds for one flexible line.

    ``u0``/``l0`` bound ``B * (ti - tj)`` while the line is switched off,
    ``u1``/``l1`` while it is in service (always ``+-capacity``).
    """

    line_id: int
    big_m: float
    u0: float
    l0: float
    u1: float
    l1: float


@dataclass(frozen=True)
class BoundSet:
    provenance: Provenance
    entries: dict[int, LineBounds] = field(default_factory=dict)
    # lines that can never be switched off in a feasible point (exact only)
    always_on: frozenset[int] = frozenset()

    def big_m(self, line_id: int) -> float:
        return self.entries[line_id].big_m

    def to_json(self) -> str:
        rows = [{"line_id": e.line_id, "big_m": e.big_m, "u0": e.u0, "l0": e.l0,
                 "u1": e.u1, "l1": e.l1, "provenance": self.provenance.value}
                for e in sorted(self.entries.values(), key=lambda e: e.line_id)]
        return json.dumps(rows, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> BoundSet:
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc)) from exc
        if not isinstance(rows, list):
            raise ParseError("expected a list of line bounds", "$")
        provenances = {r.get("provenance") for r in rows}
        if len(provenances) > 1:
            raise ParseError("mixed provenance in one bound set", "$")
        try:
            prov = Provenance(provenances.pop()) if provenances else Provenance.SHORTEST_PATH
        except ValueError as exc:
            raise ParseError(f"unknown provenance: {exc}", "$[0].provenance") from None
        entries = {}
        for k, r in enumerate(rows):
            try:
                e = LineBounds(int(r["line_id"]), float(r["big_m"]), float(r["u0"]),
                               float(r["l0"]), float(r["u1"]), float(r["l1"]))
            except KeyError as exc:
                raise ParseError(f"missing key {exc.args[0]!r}", f"$[{k}]") from None
            entries[e.line_id] = e
        return cls(prov, entries)


def _symmetric(network: Network, line_id: int, big_m: float) -> LineBounds:
    cap = network.line(line_id).capacity
    return LineBounds(line_id, big_m, big_m, -big_m, cap, -cap)


def naive_bounds(network: Network) -> BoundSet:
    g = build_fixed_subgraph(network)
    if not is_spanning_connected(g):
        comps = components(g)
        raise IslandingError(
            f"fixed lines do not span the network; components: {_fmt(comps)}", comps)
    total = sum(e.weight for e in g.edges)
    return BoundSet(Provenance.NAIVE, {
        ln.id: _symmetric(network, ln.id, ln.susceptance * total)
        for ln in network.flexible_lines})


def strengthen_bounds(network: Network) -> BoundSet:
    """Shortest-path big-M for every flexible line (one Dijkstra run per source bus)."""
    g = build_fixed_subgraph(network)
    cache = {}
    entries = {}
    for ln in network.flexible_lines:
        if ln.from_bus not in cache:
            cache[ln.from_bus] = shortest_paths(g, ln.from_bus)
        dist = cache[ln.from_bus].distance(ln.to_bus)
        if math.isinf(dist):
            comps = components(g)
            raise IslandingError(
                f"line {ln.id} ({ln.from_bus}-{ln.to_bus}): endpoints are not joined by "
                f"fixed lines; components: {_fmt(comps)}", comps, ln.id)
        entries[ln.id] = _symmetric(network, ln.id, ln.susceptance * dist)
    return BoundSet(Provenance.SHORTEST_PATH, entries)


def exact_m_opt(network: Network, line_id: int, limit: int = 16) -> float:
    """Smallest valid big-M for one line; ``inf`` when it is unbounded.

    Raises :class:`~otsbound.errors.EmptyRestriction` when no feasible point
    has the line switched off.
    """
    from .oracle import max_angle_difference

    return network.line(line_id).susceptance * max_angle_difference(network, line_id, limit)


def exact_bounds(network: Network, limit: int = 16) -> BoundSet:
    """Exact big-M and off-state McCormick bounds for every flexible line.

    A line that is in service at every feasible point gets all-zero off-state
    bounds and is listed in ``always_on``.
    """
    from .oracle import angle_difference_range

    entries = {}
    always_on = set()
    for ln in network.flexible_lines:
        try:
            lo, hi = angle_difference_range(network, ln.id, limit)
        except EmptyRestriction:
            always_on.add(ln.id)
            lo = hi = 0.0
        if math.isinf(lo) or math.isinf(hi):
            raise IslandingError(f"line {ln.id}: angle difference is unbounded while switched off",
                                 line_id=ln.id)
        B, cap = ln.susceptance, ln.capacity
        u0, l0 = B * hi, B * lo
        entries[ln.id] = LineBounds(ln.id, max(u0, -l0, 0.0), u0, l0, cap, -cap)
    return BoundSet(Provenance.EXACT, entries, frozenset(always_on))


def mccormick_from_bigm(bounds: BoundSet, network: Network) -> BoundSet:
    """Fill McCormick bounds: ``+-capacity`` in service, ``+-big_m`` switched off."""
    return BoundSet(bounds.provenance, {
        lid: _symmetric(network, lid, e.big_m) for lid, e in bounds.entries.items()},
        bounds.always_on)


def _fmt(comps) -> str:
    return " | ".join("{" + ", ".join(map(str, sorted(c))) + "}" for c in comps)
