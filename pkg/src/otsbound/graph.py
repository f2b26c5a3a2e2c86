"""Fixed-line subgraph, spanning connectivity and Dijkstra shortest paths."""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

from .network import Network


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    weight: float
    line_id: int


@dataclass(frozen=True)
class FixedSubgraph:
    """Undirected graph of the fixed lines, weighted by ``capacity / susceptance``."""

    node_count: int
    edges: tuple[Edge, ...]

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, float, int]]]:
        adj: dict[int, list[tuple[int, float, int]]] = defaultdict(list)
        for e in self.edges:
            adj[e.i].append((e.j, e.weight, e.line_id))
            adj[e.j].append((e.i, e.weight, e.line_id))
        return adj


@dataclass(frozen=True)
class ShortestPathResult:
    source: int
    distances: tuple[float, ...]
    predecessor: tuple[int | None, ...]

    def distance(self, bus: int) -> float:
        return self.distances[bus - 1]

    def path_lines(self, bus: int, graph: FixedSubgraph) -> list[int]:
        """Line ids of the shortest path from the source to ``bus``."""
        by_id = {e.line_id: e for e in graph.edges}
        out = []
        node = bus
        while node != self.source:
            lid = self.predecessor[node - 1]
            if lid is None:
                return []
            out.append(lid)
            e = by_id[lid]
            node = e.i if e.j == node else e.j
        return out[::-1]


def build_fixed_subgraph(network: Network) -> FixedSubgraph:
    edges = tuple(Edge(ln.from_bus, ln.to_bus, ln.weight, ln.id)
                  for ln in network.lines if not ln.flexible)
    return FixedSubgraph(network.n_buses, edges)


def components(g: FixedSubgraph) -> list[set[int]]:
    """Connected components as sets of bus ids, ordered by smallest member."""
    seen: set[int] = set()
    out = []
    for start in range(1, g.node_count + 1):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _, _ in g.adjacency.get(u, ()):
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        out.append(comp)
    return out


def is_spanning_connected(g: FixedSubgraph) -> bool:
    return len(components(g)) <= 1


def shortest_paths(g: FixedSubgraph, source: int) -> ShortestPathResult:
    """Single-source Dijkstra with a binary heap.

    Unreachable buses get ``inf``. When two paths tie, the predecessor edge
    with the lowest line id wins, so predecessor trees are reproducible.
    """
    n = g.node_count
    dist = [math.inf] * n
    pred: list[int | None] = [None] * n
    dist[source - 1] = 0.0
    done = [False] * n
    heap = [(0.0, source)]
    adj = g.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if done[u - 1]:
            continue
        done[u - 1] = True
        for v, w, lid in adj.get(u, ()):
            if done[v - 1]:
                continue
            nd = d + w
            cur = dist[v - 1]
            if nd < cur:
                dist[v - 1] = nd
                pred[v - 1] = lid
                heapq.heappush(heap, (nd, v))
            elif nd == cur and lid < pred[v - 1]:
                pred[v - 1] = lid
    return ShortestPathResult(source, tuple(dist), tuple(pred))
