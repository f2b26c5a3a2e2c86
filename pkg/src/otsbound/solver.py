"""LP relaxations, outer-approximation cuts and branch-and-bound for :class:`MipModel`.

The reference LP kernel is :mod:`otsbound.simplex`; ``lp_kernel="highs"``
routes the same standard-form LPs through :func:`scipy.optimize.linprog`
instead, which the enumeration oracle uses so that its answers do not depend
on the kernel branch-and-bound runs on.

Convex ``p**2 <= t`` terms are handled by tangent cuts ``t >= 2*q*p - q**2``
added until the largest violation drops below ``epigraph_tol``. Cuts are
globally valid, so a single pool is shared by every node of the tree.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import simplex
from .errors import InvalidArgument, NumericalError
from .model import MipModel, Sense

logger = logging.getLogger(__name__)


class Status(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class SolverConfig:
    gap_tolerance_percent: float = 0.1
    time_limit: float = math.inf
    integrality_tol: float = 1e-6
    lp_feas_tol: float = 1e-7
    epigraph_tol: float = 1e-6
    node_selection: str = "best-bound"
    branching: str = "most-fractional"
    lp_kernel: str = "simplex"
    max_cut_rounds: int = 500

    def __post_init__(self):
        for name in ("gap_tolerance_percent", "time_limit", "integrality_tol",
                     "lp_feas_tol", "epigraph_tol"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.lp_kernel not in ("simplex", "highs"):
            raise InvalidArgument(f"unknown LP kernel {self.lp_kernel!r}")
        if self.node_selection != "best-bound" or self.branching != "most-fractional":
            raise InvalidArgument("only best-bound selection with most-fractional branching is implemented")


@dataclass
class Solution:
    status: Status
    objective: float
    best_bound: float
    gap_percent: float
    values: dict[str, float] = field(default_factory=dict)
    node_count: int = 0
    wall_time: float = 0.0
    lp_count: int = 0
    # (z_LB, z_UB) after every branch-and-bound node
    trace: list[tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def has_incumbent(self) -> bool:
        return bool(self.values)


def relative_gap(z_ub: float, z_lb: float) -> float:
    """Relative optimality gap ``(z_ub - z_lb) / z_ub * 100``.

    The denominator is ``|z_ub|`` so that the value stays non-negative for
    negative objectives. At ``z_ub == 0`` the ratio is undefined; it is
    reported as 0 when ``z_lb`` is also 0 and as ``inf`` otherwise.
    """
    if z_ub == 0:
        return 0.0 if z_lb == 0 else math.inf
    if math.isinf(z_ub) or math.isinf(z_lb):
        return 0.0 if z_ub == z_lb else math.inf
    return (z_ub - z_lb) / abs(z_ub) * 100.0


class _Relaxation:
    """Standard-form view of a model plus a growing pool of epigraph cuts.

    Every row gets a slack column (fixed at zero for equalities), so the
    slack basis is always a valid cold start and a basis saved before new
    cut rows were appended stays valid once the new slacks are added to it.
    """

    def __init__(self, model: MipModel, config: SolverConfig):
        self.model = model
        self.config = config
        c, A, senses, rhs, lower, upper = model.dense()
        self.c = c
        self.n = len(c)
        self.lower = lower
        self.upper = upper
        self.rows = A
        self.rhs = rhs
        self.senses = list(senses)
        self.lp_count = 0
        # a t that has no cost, no upper bound and no row is set to p**2 after
        # each solve instead of being cut (linear generators in mixed cases)
        used = np.any(A != 0, axis=0)
        self.free_terms = [(p, t) for p, t in model.epigraph_terms
                           if c[t] == 0 and not used[t] and upper[t] == math.inf]
        self.terms = [term for term in model.epigraph_terms if term not in self.free_terms]
        cuts = []
        for p, t in self.terms:
            lo, hi = lower[p], upper[p]
            pts = [q for q in (lo, hi) if math.isfinite(q)]
            if len(pts) == 2:
                pts.append(0.5 * (lo + hi))
            elif not pts:
                pts = [0.0]
            for q in dict.fromkeys(pts):
                cuts.append(self._cut(p, t, q))
        self._append_rows(cuts)

    @property
    def m(self) -> int:
        return len(self.senses)

    def _cut(self, p, t, q):
        row = np.zeros(self.n)
        row[p] = 2.0 * q
        row[t] = -1.0
        return row, q * q

    def _append_rows(self, cuts):
        if cuts:
            self.rows = np.vstack([self.rows] + [r for r, _ in cuts])
            self.rhs = np.concatenate([self.rhs, [b for _, b in cuts]])
            self.senses += [Sense.LE] * len(cuts)
        m = self.m
        self.A_std = np.hstack([self.rows, np.eye(m)])
        self.c_std = np.concatenate([self.c, np.zeros(m)])
        self.slack_lower = np.array([0.0 if s is not Sense.GE else -math.inf for s in self.senses])
        self.slack_upper = np.array([0.0 if s is not Sense.LE else math.inf for s in self.senses])

    def _extend(self, warm):
        """Adapt a saved ``(basis, x)`` to rows appended since it was saved."""
        if warm is None:
            return np.arange(self.n, self.n + self.m), None
        basis, x = warm
        k = self.m - len(basis)
        if k:
            basis = np.concatenate([basis, np.arange(self.n + len(basis), self.n + self.m)])
            x = np.concatenate([x, np.zeros(k)])
        return basis, x

    def _solve_once(self, lower, upper, warm):
        lo = np.concatenate([lower, self.slack_lower])
        up = np.concatenate([upper, self.slack_upper])
        self.lp_count += 1
        if self.config.lp_kernel == "highs":
            status, x = _highs(self.c_std, self.A_std, self.rhs, lo, up)
            return status, x, None
        basis, x0 = self._extend(warm)
        try:
            res = simplex.solve(self.c_std, self.A_std, self.rhs, lo, up, basis=basis, x0=x0,
                                feas_tol=self.config.lp_feas_tol)
        except NumericalError:
            if warm is None:
                raise
            logger.debug("warm start failed, re-solving from the slack basis")
            res = simplex.solve(self.c_std, self.A_std, self.rhs, lo, up,
                                basis=np.arange(self.n, self.n + self.m),
                                feas_tol=self.config.lp_feas_tol)
        if res.status != simplex.OPTIMAL:
            return res.status, None, None
        return res.status, res.x, (res.basis, res.x)

    def solve(self, lower=None, upper=None, warm=None, strict=True):
        """Solve to epigraph tolerance.

        Returns ``(status, x, objective, warm)`` where ``warm`` can seed a
        later solve of the same relaxation with different bounds. With
        ``strict=False`` a term is only cut while its violation, weighted by
        the cost of its ``t``, is above ``1e-9`` relative to the objective;
        the value is still a valid lower bound since every cut is.
        """
        lower = self.lower if lower is None else lower
        upper = self.upper if upper is None else upper
        for _ in range(self.config.max_cut_rounds):
            status, xs, warm = self._solve_once(lower, upper, warm)
            if status != simplex.OPTIMAL:
                return status, None, math.nan, None
            x = xs[:self.n].copy()
            for p, t in self.free_terms:
                x[t] = max(x[t], x[p] * x[p])
            cuts = []
            loose = 1e-9 * max(1.0, abs(float(self.c @ x)))
            for p, t in self.terms:
                viol = x[p] * x[p] - x[t]
                if viol > self.config.epigraph_tol and (strict or abs(self.c[t]) * viol > loose):
                    cuts.append(self._cut(p, t, x[p]))
            if not cuts:
                return status, x, float(self.c @ x) + self.model.objective_constant, warm
            self._append_rows(cuts)
        raise NumericalError("epigraph cuts did not converge")


def _highs(c, A, b, lo, up):
    from scipy.optimize import linprog

    bounds = [(None if not math.isfinite(a) else a, None if not math.isfinite(z) else z)
              for a, z in zip(lo, up)]
    res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    if res.status == 0:
        return simplex.OPTIMAL, res.x
    if res.status == 2:
        return simplex.INFEASIBLE, None
    if res.status == 3:
        return simplex.UNBOUNDED, None
    raise NumericalError(f"HiGHS failed: {res.message}")


def _values(model: MipModel, x) -> dict[str, float]:
    return {v.name: float(x[k]) for k, v in enumerate(model.variables)}


def solve_lp(model: MipModel, config: SolverConfig | None = None) -> Solution:
    """Solve a model without binary variables (see :func:`otsbound.model.relax`)."""
    config = config or SolverConfig()
    if model.binary_indices:
        raise InvalidArgument("solve_lp needs a model without binaries; relax it first")
    start = time.perf_counter()
    relax = _Relaxation(model, config)
    status, x, obj, _ = relax.solve()
    wall = time.perf_counter() - start
    if status == simplex.INFEASIBLE:
        return Solution(Status.INFEASIBLE, math.inf, math.inf, math.inf,
                        node_count=1, wall_time=wall, lp_count=relax.lp_count)
    if status == simplex.UNBOUNDED:
        return Solution(Status.UNBOUNDED, -math.inf, -math.inf, math.inf,
                        node_count=1, wall_time=wall, lp_count=relax.lp_count)
    return Solution(Status.OPTIMAL, obj, obj, 0.0, _values(model, x), node_count=1,
                    wall_time=wall, lp_count=relax.lp_count)


def _most_fractional(x, binaries, tol):
    """Binary with the largest distance to an integer; lowest index on ties."""
    branch_on, worst = None, tol
    for k in binaries:
        frac = abs(x[k] - round(x[k]))
        if frac > worst + 1e-12:
            branch_on, worst = k, frac
    return branch_on


def solve_mip(model: MipModel, config: SolverConfig | None = None) -> Solution:
    """Best-bound branch-and-bound on the binary variables of ``model``.

    Terminates when the relative gap between the incumbent and the smallest
    open-node bound reaches ``config.gap_tolerance_percent``, when the tree is
    exhausted, or at the time limit.
    """
    config = config or SolverConfig()
    start = time.perf_counter()
    relax = _Relaxation(model, config)
    binaries = model.binary_indices
    tol_int = config.integrality_tol
    gap_tol = config.gap_tolerance_percent

    def cutoff(z_ub):
        # nodes whose bound reaches this value cannot improve the incumbent enough
        if math.isinf(z_ub):
            return z_ub
        return z_ub - max(abs(z_ub) * gap_tol / 100.0, 1e-9)

    z_ub = math.inf
    incumbent = None
    pruned_min = math.inf
    nodes = 0
    trace: list[tuple[float, float]] = []
    seq = 0
    heap = [(-math.inf, seq, relax.lower.copy(), relax.upper.copy(), None)]
    timed_out = False

    while heap:
        if time.perf_counter() - start > config.time_limit:
            timed_out = True
            break
        node = heapq.heappop(heap)
        key, _, lo, up, warm = node
        z_lb = min(key, pruned_min, z_ub)
        if incumbent is not None and relative_gap(z_ub, z_lb) <= gap_tol:
            heapq.heappush(heap, node)
            break
        if key >= cutoff(z_ub):
            pruned_min = min(pruned_min, key)
            continue
        status, x, obj, warm = relax.solve(lo, up, warm, strict=False)
        nodes += 1
        if status == simplex.UNBOUNDED:
            wall = time.perf_counter() - start
            return Solution(Status.UNBOUNDED, -math.inf, -math.inf, math.inf,
                            node_count=nodes, wall_time=wall, lp_count=relax.lp_count)
        branch_on = None
        if status == simplex.OPTIMAL:
            bound = max(obj, key)
            branch_on = _most_fractional(x, binaries, tol_int)
            if branch_on is None and bound < cutoff(z_ub) and relax.terms:
                # integral: tighten the epigraph before trusting the objective
                status, x, obj, warm = relax.solve(lo, up, warm, strict=True)
                bound = max(obj, key)
                branch_on = _most_fractional(x, binaries, tol_int) if status == simplex.OPTIMAL else None
        if status == simplex.OPTIMAL:
            if bound >= cutoff(z_ub):
                pruned_min = min(pruned_min, bound)
            elif branch_on is None:
                incumbent, z_ub = x, obj
                logger.debug("node %d: incumbent %.10g", nodes, obj)
            else:
                down_up = up.copy()
                down_up[branch_on] = 0.0
                up_lo = lo.copy()
                up_lo[branch_on] = 1.0
                seq += 1
                heapq.heappush(heap, (bound, seq, lo, down_up, warm))
                seq += 1
                heapq.heappush(heap, (bound, seq, up_lo, up, warm))
        open_min = heap[0][0] if heap else math.inf
        trace.append((min(key, open_min, pruned_min, z_ub), z_ub))

    open_min = min((h[0] for h in heap), default=math.inf)
    z_lb = min(open_min, pruned_min, z_ub)
    wall = time.perf_counter() - start
    if incumbent is None:
        status = Status.TIME_LIMIT if timed_out else Status.INFEASIBLE
        return Solution(status, math.inf, z_lb, math.inf, node_count=nodes,
                        wall_time=wall, lp_count=relax.lp_count, trace=trace)
    gap = relative_gap(z_ub, z_lb)
    status = Status.OPTIMAL if gap <= gap_tol else Status.TIME_LIMIT
    return Solution(status, z_ub, z_lb, gap, _values(model, incumbent), node_count=nodes,
                    wall_time=wall, lp_count=relax.lp_count, trace=trace)
