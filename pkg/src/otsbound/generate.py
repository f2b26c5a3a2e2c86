"""Seeded random OTS instances with a connected spanning set of fixed lines."""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgument
from .network import Bus, CostFunction, Generator, Line, Network


def random_network(seed: int, n_buses: int, n_flexible: int, *, extra_fixed: int = 0,
                   cost: str = "linear", r: int = 0, load_level: float = 0.6,
                   capacity_range: tuple[float, float] = (40.0, 120.0)) -> Network:
    """Build a random instance whose all-lines-on dispatch is feasible.

    The fixed lines form a random spanning tree plus ``extra_fixed`` chords;
    ``n_flexible`` further lines join random bus pairs. ``cost`` is
    ``"linear"``, ``"quadratic"`` or ``"mixed"`` (alternating kinds). Total
    demand starts at ``load_level`` times total generation capacity and is
    scaled down until the all-on network can serve it.
    """
    if n_buses < 2:
        raise InvalidArgument("need at least two buses")
    if cost not in ("linear", "quadratic", "mixed"):
        raise InvalidArgument(f"unknown cost family {cost!r}")
    if r > n_flexible:
        raise InvalidArgument("r exceeds the number of flexible lines")
    rng = np.random.default_rng(seed)

    pairs = [(int(rng.integers(1, k)), k) for k in range(2, n_buses + 1)]
    fixed_count = len(pairs) + extra_fixed
    while len(pairs) < fixed_count + n_flexible:
        i, j = (int(v) for v in rng.choice(np.arange(1, n_buses + 1), size=2, replace=False))
        pairs.append((i, j))
    lo, hi = capacity_range
    lines = []
    for k, (i, j) in enumerate(pairs, start=1):
        x = round(float(rng.uniform(0.05, 0.3)), 3)
        cap = round(float(rng.uniform(lo, hi)), 1)
        lines.append(Line(k, i, j, round(1.0 / x, 6), cap, flexible=k > fixed_count))

    n_gen = max(2, n_buses // 3)
    gen_buses = sorted(int(b) for b in rng.choice(np.arange(1, n_buses + 1), size=n_gen, replace=False))
    gens = []
    for k, bus in enumerate(gen_buses, start=1):
        pmax = round(float(rng.uniform(100.0, 250.0)), 1)
        b = round(float(rng.uniform(10.0, 60.0)), 2)
        c = round(float(rng.uniform(0.0, 10.0)), 2)
        quad = cost == "quadratic" or (cost == "mixed" and k % 2 == 1)
        if quad:
            fn = CostFunction.quadratic(round(float(rng.uniform(0.005, 0.05)), 4), b, c)
        else:
            fn = CostFunction.linear(b, c)
        gens.append(Generator(k, bus, 0.0, pmax, fn))

    load_buses = [b for b in range(1, n_buses + 1) if b not in gen_buses] or list(range(1, n_buses + 1))
    shares = rng.uniform(0.5, 1.5, size=len(load_buses))
    shares /= shares.sum()
    total = load_level * sum(g.p_max for g in gens)
    for _ in range(40):
        demand = dict.fromkeys(range(1, n_buses + 1), 0.0)
        for b, s in zip(load_buses, shares):
            demand[b] = round(float(s * total), 2)
        net = Network(tuple(Bus(b, demand[b]) for b in range(1, n_buses + 1)),
                      tuple(gens), tuple(lines), r)
        if _all_on_feasible(net):
            return net
        total *= 0.85
    raise InvalidArgument(f"seed {seed}: could not find a feasible load level")


def _all_on_feasible(network: Network) -> bool:
    from .oracle import ORACLE_CONFIG, topology_model
    from .solver import Status, solve_lp

    on = {lid: True for lid in network.flexible_ids}
    return solve_lp(topology_model(network, on), ORACLE_CONFIG).status is Status.OPTIMAL
