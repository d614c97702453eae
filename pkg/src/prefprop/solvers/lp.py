"""Bounded-variable revised simplex (two phases) returning a vertex optimizer."""

from __future__ import annotations

import numpy as np

from ..problem import ScalarizedProblem
from .base import SolverConfig, SolverSolution, active_set, kkt_residual

_PIVOT_TOL = 1e-9
_BLAND_AFTER_DEGENERATE = 25


class _Tableau:
    """Standard-form data ``M z = b`` with bounds on every column.

    Columns are the structural variables, one slack per row (``[0, inf)`` for
    inequality rows, ``[0, 0]`` for equalities) and one artificial per row.
    """

    def __init__(self, sp: ScalarizedProblem):
        n = sp.n
        p, q = len(sp.b_ub), len(sp.b_eq)
        m = p + q
        A = np.vstack([sp.A_ub, sp.A_eq]).reshape(m, n)
        b = np.concatenate([sp.b_ub, sp.b_eq])
        self.n, self.m = n, m
        self.b = b
        lo = np.concatenate([sp.lower, np.zeros(m), np.zeros(m)])
        hi = np.concatenate([sp.upper, np.r_[np.full(p, np.inf), np.zeros(q)], np.full(m, np.inf)])

        z = np.zeros(n + 2 * m)
        z[:n] = np.where(np.isfinite(sp.lower), sp.lower, np.where(np.isfinite(sp.upper), sp.upper, 0.0))
        resid = b - A @ z[:n]
        sigma = np.where(resid >= 0, 1.0, -1.0)
        self.M = np.hstack([A, np.eye(m), np.diag(sigma)])

        basis = []
        artificial_rows = []
        for i in range(m):
            if i < p and resid[i] >= 0:
                basis.append(n + i)
                z[n + i] = resid[i]
            else:
                basis.append(n + m + i)
                z[n + m + i] = abs(resid[i])
                artificial_rows.append(i)
        # unused artificials are pinned at zero
        for i in range(m):
            if i not in artificial_rows:
                hi[n + m + i] = 0.0
        self.lo, self.hi, self.z = lo, hi, z
        self.basis = basis
        self.artificial_rows = artificial_rows

    def recompute_basics(self):
        nonbasic = np.ones(len(self.z), dtype=bool)
        nonbasic[self.basis] = False
        rhs = self.b - self.M[:, nonbasic] @ self.z[nonbasic]
        B = self.M[:, self.basis]
        self.z[self.basis] = np.linalg.solve(B, rhs) if self.m else rhs


def _iterate(t: _Tableau, cost: np.ndarray, cfg: SolverConfig, allowed: np.ndarray, budget: int):
    """Run simplex pivots on ``cost``; returns (status, iterations)."""
    it = 0
    degenerate_run = 0
    ncol = len(t.z)
    while True:
        if it >= budget:
            return "numeric_failure", it
        B = t.M[:, t.basis]
        in_basis = np.zeros(ncol, dtype=bool)
        in_basis[t.basis] = True
        y = np.linalg.solve(B.T, cost[t.basis]) if t.m else np.zeros(0)
        d = cost - t.M.T @ y

        at_lo = t.z <= t.lo + cfg.feas_tol
        at_hi = t.z >= t.hi - cfg.feas_tol
        free_at_zero = ~np.isfinite(t.lo) & ~np.isfinite(t.hi)
        movable = allowed & ~in_basis & (t.hi > t.lo)
        inc = movable & (d < -cfg.opt_tol) & (~at_hi) & (at_lo | free_at_zero | ~np.isfinite(t.lo))
        dec = movable & (d > cfg.opt_tol) & (~at_lo) & (at_hi | free_at_zero | ~np.isfinite(t.hi))
        candidates = np.flatnonzero(inc | dec)
        if candidates.size == 0:
            return "optimal", it

        use_bland = cfg.pivot_rule == "bland" or degenerate_run >= _BLAND_AFTER_DEGENERATE
        if use_bland:
            j = int(candidates[0])
        else:
            j = int(candidates[np.argmax(np.abs(d[candidates]))])
        direction = 1.0 if inc[j] else -1.0

        w = np.linalg.solve(B, t.M[:, j]) if t.m else np.zeros(0)
        # basic values move as z_B - step * direction * w
        move = direction * w
        step = np.inf
        leave = -1
        for r in range(t.m):
            k = t.basis[r]
            if move[r] > _PIVOT_TOL and np.isfinite(t.lo[k]):
                ratio = max(t.z[k] - t.lo[k], 0.0) / move[r]
            elif move[r] < -_PIVOT_TOL and np.isfinite(t.hi[k]):
                ratio = max(t.hi[k] - t.z[k], 0.0) / -move[r]
            else:
                continue
            if ratio < step - 1e-12 or (abs(ratio - step) <= 1e-12 and k < t.basis[leave]):
                step, leave = ratio, r
        flip = t.hi[j] - t.lo[j]
        if np.isfinite(flip) and flip <= step:
            t.z[j] = t.hi[j] if direction > 0 else t.lo[j]
            t.recompute_basics()
            degenerate_run = 0
            it += 1
            continue
        if not np.isfinite(step):
            return "unbounded", it

        k = t.basis[leave]
        t.z[j] += direction * step
        t.z[t.basis] -= step * move
        t.z[k] = t.lo[k] if move[leave] > 0 else t.hi[k]
        t.basis[leave] = j
        t.recompute_basics()
        degenerate_run = degenerate_run + 1 if step <= 1e-12 else 0
        it += 1


def solve_lp(sp: ScalarizedProblem, cfg: SolverConfig | None = None) -> SolverSolution:
    """Minimize ``linear_cost.x`` over the polytope of ``sp``.

    An optimal result is a basic feasible solution: nonbasic variables sit at
    bounds, so the tight constraints determine the point. With Bland's rule the
    vertex returned on a face of optima is a deterministic function of the
    input data.
    """
    cfg = cfg or SolverConfig()
    if sp.kind != "LP":
        raise ValueError("solve_lp requires a problem without quadratic terms")
    t = _Tableau(sp)
    n, m = t.n, t.m
    ncol = len(t.z)
    iterations = 0

    if t.artificial_rows:
        cost1 = np.zeros(ncol)
        cost1[n + m :] = 1.0
        allowed = np.ones(ncol, dtype=bool)
        status, it = _iterate(t, cost1, cfg, allowed, cfg.max_iter)
        iterations += it
        if status != "optimal":
            return _result(sp, t, "numeric_failure", iterations, "phase 1 did not converge")
        infeas = float(np.sum(t.z[n + m :]))
        if infeas > cfg.feas_tol * max(1.0, float(np.max(np.abs(t.b), initial=0.0))):
            return _result(sp, t, "infeasible", iterations, f"phase 1 residual {infeas:.3g}")
        t.hi[n + m :] = 0.0
        t.z[n + m :] = np.clip(t.z[n + m :], 0.0, 0.0)
        t.recompute_basics()

    cost2 = np.zeros(ncol)
    cost2[:n] = sp.linear_cost
    allowed = np.ones(ncol, dtype=bool)
    allowed[n + m :] = False
    status, it = _iterate(t, cost2, cfg, allowed, cfg.max_iter)
    iterations += it
    if status == "optimal" and cfg.tie_break == "lower":
        iterations += _prefer_lower_bounds(t, cost2, cfg, allowed)
    return _result(sp, t, status, iterations, cfg=cfg)


def _prefer_lower_bounds(t: _Tableau, cost: np.ndarray, cfg: SolverConfig, allowed: np.ndarray) -> int:
    """Move to the optimal-face vertex closest to the lower bounds.

    Nonbasic columns with nonzero reduced cost are frozen, which leaves the
    primary objective constant on what remains; a secondary simplex then
    minimizes the range-normalized distance of the structurals from their
    lower bounds.
    """
    B = t.M[:, t.basis]
    y = np.linalg.solve(B.T, cost[t.basis]) if t.m else np.zeros(0)
    d = cost - t.M.T @ y
    nonbasic = np.ones(len(t.z), dtype=bool)
    nonbasic[t.basis] = False
    freeze = nonbasic & (np.abs(d) > cfg.opt_tol)
    if not np.any(nonbasic & ~freeze & allowed & (t.hi > t.lo)):
        return 0
    saved_lo, saved_hi = t.lo.copy(), t.hi.copy()
    t.lo[freeze] = t.z[freeze]
    t.hi[freeze] = t.z[freeze]
    span = saved_hi[: t.n] - saved_lo[: t.n]
    secondary = np.zeros(len(t.z))
    finite = np.isfinite(span) & (span > 0)
    secondary[: t.n][finite] = 1.0 / span[finite]
    _, it = _iterate(t, secondary, cfg, allowed, cfg.max_iter)
    t.lo, t.hi = saved_lo, saved_hi
    return it


def _result(sp, t: _Tableau, status: str, iterations: int, message: str = "", cfg: SolverConfig | None = None) -> SolverSolution:
    cfg = cfg or SolverConfig()
    x = t.z[: t.n].copy()
    if status == "optimal":
        # snap nonbasic structurals exactly onto their bounds
        x = np.clip(x, sp.lower, sp.upper)
        res = kkt_residual(sp, x)
        if res > cfg.opt_tol or sp.max_violation(x) > cfg.feas_tol:
            status, message = "numeric_failure", f"KKT residual {res:.3g} above tolerance"
        return SolverSolution(
            point=x,
            objective_value=sp.value(x),
            status=status,
            active_set=active_set(sp, x),
            kkt_residual=res,
            iterations=iterations,
            message=message,
        )
    return SolverSolution(
        point=x,
        objective_value=float("nan"),
        status=status,
        iterations=iterations,
        message=message,
    )
