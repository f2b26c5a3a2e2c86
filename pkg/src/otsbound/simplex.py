"""Dense bounded-variable revised simplex.

Solves ``min c.x  s.t.  A x = b,  lower <= x <= upper`` where bounds may be
infinite. Nonbasic variables sit at a finite bound, or anywhere when free.

Phase one minimises the sum of bound violations of the basic variables
(a composite phase one), so the kernel can start from any nonsingular basis:
callers that re-solve after adding cut rows or tightening bounds pass the
previous basis back in. Without a starting basis, one artificial column per
row is appended with bounds ``[0, 0]`` and phase one drives them out.

Pricing is Dantzig's rule. When the objective stalls for ``2 * m``
iterations the kernel switches to Bland's rule until it makes progress
again, which rules out cycling on the degenerate vertices OTS models are
full of.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-9
_REFACTOR_EVERY = 40


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int
    basis: np.ndarray | None = None


class _Kernel:
    def __init__(self, A, b, lower, upper, x, basis, primal_tol):
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.x = x
        self.basis = np.array(basis, dtype=int)
        self.m = A.shape[0]
        # per-variable tolerance, relative to the magnitude of its bounds
        mag = np.maximum(np.where(np.isfinite(lower), np.abs(lower), 0.0),
                         np.where(np.isfinite(upper), np.abs(upper), 0.0))
        self.tol = primal_tol * np.maximum(1.0, mag)
        self.iterations = 0
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self._refactor()

    def _refactor(self):
        try:
            self.Binv = np.linalg.inv(self.A[:, self.basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis") from exc
        if not np.all(np.isfinite(self.Binv)):
            raise NumericalError("singular basis")
        self._since_refactor = 0
        self._update_basic_values()

    def _update_basic_values(self):
        x = self.x
        x[self.basis] = 0.0
        x[self.basis] = self.Binv @ (self.b - self.A @ x)

    def infeasibility(self):
        xb = self.x[self.basis]
        below = np.maximum(self.lower[self.basis] - xb, 0.0)
        above = np.maximum(xb - self.upper[self.basis], 0.0)
        return below, above

    def run(self, c, max_iter, phase_one=False):
        A, x = self.A, self.x
        m = self.m
        is_basic = self.is_basic
        bland = False
        best = np.inf
        stall = 0
        if phase_one:
            dual_tol = _DUAL_TOL
        else:
            dual_tol = _DUAL_TOL * max(1.0, float(np.abs(c).max(initial=0.0)))
        for _ in range(max_iter):
            lower_b = self.lower[self.basis]
            upper_b = self.upper[self.basis]
            xb = x[self.basis]
            if phase_one:
                tol_b = self.tol[self.basis]
                below = xb < lower_b - tol_b
                above = xb > upper_b + tol_b
                if not (below.any() or above.any()):
                    return OPTIMAL
                c = np.zeros(A.shape[1])
                c[self.basis[below]] = -1.0
                c[self.basis[above]] = 1.0
                # violated bounds are relaxed; the bound being approached blocks
                lb = np.where(below, -np.inf, np.where(above, upper_b, lower_b))
                ub = np.where(below, lower_b, np.where(above, np.inf, upper_b))
                progress = float(np.sum(lower_b[below] - xb[below]) + np.sum(xb[above] - upper_b[above]))
            else:
                lb, ub = lower_b, upper_b
                progress = None
            self.iterations += 1

            y = c[self.basis] @ self.Binv
            d = c - y @ A
            d[is_basic] = 0.0
            inc = (d < -dual_tol) & (x < self.upper - 1e-12) & ~is_basic
            dec = (d > dual_tol) & (x > self.lower + 1e-12) & ~is_basic
            cand = inc | dec
            if not cand.any():
                return INFEASIBLE if phase_one else OPTIMAL
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                j = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
            sigma = 1.0 if inc[j] else -1.0

            alpha = self.Binv @ A[:, j]
            delta = -sigma * alpha  # change of the basic values per unit step
            ratios = np.full(m, np.inf)
            relaxed = np.full(m, np.inf)
            tol_b = self.tol[self.basis]
            down = delta < -_PIVOT_TOL
            up = delta > _PIVOT_TOL
            with np.errstate(invalid="ignore"):
                ratios[down] = (xb[down] - lb[down]) / -delta[down]
                ratios[up] = (ub[up] - xb[up]) / delta[up]
                relaxed[down] = (xb[down] - lb[down] + tol_b[down]) / -delta[down]
                relaxed[up] = (ub[up] - xb[up] + tol_b[up]) / delta[up]
            ratios = np.where(np.isnan(ratios), np.inf, np.maximum(ratios, 0.0))
            relaxed = np.where(np.isnan(relaxed), np.inf, relaxed)
            t_flip = self.upper[j] - x[j] if sigma > 0 else x[j] - self.lower[j]
            t_row = ratios.min() if m else np.inf
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                if phase_one:
                    raise NumericalError("unbounded ray in phase one")
                return UNBOUNDED

            if t_flip <= t_row:
                x[j] += sigma * t_flip
                x[self.basis] = xb + delta * t_flip
            else:
                if bland:
                    ties = np.flatnonzero(ratios <= t_row + 1e-12)
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    # Harris: among rows blocking within tolerance take the largest pivot
                    ties = np.flatnonzero(ratios <= max(relaxed.min(), t_row))
                    r = int(ties[np.argmax(np.abs(delta[ties]))])
                t_row = ratios[r]
                leaving = self.basis[r]
                x[j] += sigma * t_row
                x[self.basis] = xb + delta * t_row
                x[leaving] = lb[r] if delta[r] < 0 else ub[r]
                if not np.isfinite(x[leaving]):
                    raise NumericalError("leaving variable has no finite bound")
                self.basis[r] = j
                is_basic[leaving] = False
                is_basic[j] = True
                self._pivot(r, alpha)

            value = progress if phase_one else float(c @ x)
            if value < best - 1e-11 * max(1.0, abs(best) if np.isfinite(best) else 1.0):
                best = value
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > 2 * max(m, 1) and not bland:
                    logger.debug("simplex stalled, switching to Bland's rule")
                    bland = True
        raise NumericalError(f"simplex exceeded {max_iter} iterations")

    def _pivot(self, r, alpha):
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self._refactor()
            return
        Binv = self.Binv
        row = Binv[r] / alpha[r]
        Binv -= np.outer(alpha, row)
        Binv[r] = row
        self._update_basic_values()


def solve(c, A, b, lower, upper, *, basis=None, x0=None, feas_tol: float = 1e-7,
          max_iter: int | None = None) -> LPResult:
    """Minimise ``c.x`` subject to ``A x = b`` and ``lower <= x <= upper``.

    ``basis`` (column indices, one per row) and ``x0`` (values of the
    nonbasic variables) warm-start the kernel; nonbasic values are clamped
    into the bounds.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = A.shape
    if np.any(lower > upper):
        return LPResult(INFEASIBLE, None, np.nan, 0)
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    if x0 is None:
        x = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    else:
        x = np.clip(np.asarray(x0, dtype=float).copy(), lower, upper)
    n_art = 0
    if basis is None:
        n_art = m
        A = np.hstack([A, np.eye(m)])
        lower = np.concatenate([lower, np.zeros(m)])
        upper = np.concatenate([upper, np.zeros(m)])
        x = np.concatenate([x, np.zeros(m)])
        c_full = np.concatenate([c, np.zeros(m)])
        basis = np.arange(n, n + m)
    else:
        c_full = c
    bscale = max(1.0, float(np.abs(b).max(initial=0.0)))
    kernel = _Kernel(A, b, lower, upper, x, basis, primal_tol=1e-9)

    if kernel.run(None, max_iter, phase_one=True) == INFEASIBLE:
        below, above = kernel.infeasibility()
        if below.sum() + above.sum() > feas_tol * bscale:
            return LPResult(INFEASIBLE, None, np.nan, kernel.iterations)
    status = kernel.run(c_full, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, -np.inf, kernel.iterations)

    kernel._refactor()
    xs = kernel.x[:n].copy()
    viol = np.abs(A[:, :n] @ xs - b).max(initial=0.0)
    if viol > 10 * feas_tol * bscale:
        raise NumericalError(f"row residual {viol:.3g} after optimal termination")
    final_basis = None if n_art else kernel.basis.copy()
    return LPResult(OPTIMAL, xs, float(c @ xs), kernel.iterations, final_basis)
