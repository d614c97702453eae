"""Primal active-set method for convex rank-one-plus-affine QPs."""

from __future__ import annotations

import numpy as np

from ..problem import ScalarizedProblem
from .base import SolverConfig, SolverSolution, active_set, inequality_rows, kkt_residual
from .lp import solve_lp

_ZERO_STEP = 1e-12


def _null_space(A: np.ndarray, n: int) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return vt[rank:].T


def _independent_subset(rows: np.ndarray, base: np.ndarray, candidates) -> list[int]:
    """Greedy (in index order) candidates whose rows keep ``[base; chosen]`` full rank."""
    chosen: list[int] = []
    current = base
    rank = np.linalg.matrix_rank(current) if current.size else 0
    for i in candidates:
        trial = np.vstack([current, rows[i : i + 1]])
        r = np.linalg.matrix_rank(trial, tol=1e-9)
        if r > rank:
            chosen.append(i)
            current, rank = trial, r
    return chosen


def solve_qp(sp: ScalarizedProblem, cfg: SolverConfig | None = None) -> SolverSolution:
    """Minimize a convex QP whose Hessian is a sum of rank-one terms.

    The start is the LP optimum of the linear part (or any feasible vertex if
    that LP is unbounded). Each iteration minimizes over the null space of
    the working set: a Newton step where the reduced Hessian has curvature
    along the reduced gradient, otherwise a zero-curvature descent ray that
    runs until a constraint blocks it. Constraints with negative multipliers
    are released one at a time, lowest index first on ties.
    """
    cfg = cfg or SolverConfig()
    if sp.kind == "LP":
        return solve_lp(sp, cfg)

    start = solve_lp(sp.with_cost(sp.linear_cost), cfg)
    if start.status == "unbounded":
        start = solve_lp(sp.with_cost(np.zeros(sp.n)), cfg)
    if start.status != "optimal":
        status = start.status if start.status == "infeasible" else "numeric_failure"
        return SolverSolution(start.point, float("nan"), status, iterations=start.iterations, message="no feasible start")

    n = sp.n
    H = sp.hessian()
    G, h, labels = inequality_rows(sp)
    E = sp.A_eq
    x = start.point.copy()
    slack = h - G @ x
    tight = [i for i in range(len(h)) if slack[i] <= cfg.feas_tol * (1.0 + abs(h[i]))]
    working = _independent_subset(G, E, tight)

    iterations = start.iterations
    for _ in range(cfg.max_iter):
        iterations += 1
        A_w = np.vstack([E, G[working]]).reshape(-1, n)
        Z = _null_space(A_w, n)
        grad = sp.gradient(x)
        p = np.zeros(n)
        ray = False
        if Z.shape[1]:
            rz = Z.T @ grad
            Mz = Z.T @ H @ Z
            ev, V = np.linalg.eigh(Mz)
            curv = ev > 1e-12 * max(1.0, float(np.max(np.abs(ev), initial=0.0)))
            coef = V.T @ rz
            null_part = V[:, ~curv] @ coef[~curv]
            if np.linalg.norm(null_part) > _ZERO_STEP:
                p = -Z @ null_part
                ray = True
            else:
                p = -Z @ (V[:, curv] @ (coef[curv] / ev[curv]))

        if np.linalg.norm(p) <= _ZERO_STEP * max(1.0, np.linalg.norm(x)):
            if not working:
                break
            lam, *_ = np.linalg.lstsq(A_w.T, -grad, rcond=None)
            lam_ineq = lam[E.shape[0] :]
            worst = int(np.argmin(lam_ineq))
            if lam_ineq[worst] >= -cfg.opt_tol:
                break
            working.pop(worst)
            continue

        Gp = G @ p
        step = np.inf if ray else 1.0
        block = -1
        for i in range(len(h)):
            if i in working or Gp[i] <= 1e-14:
                continue
            ratio = max(h[i] - G[i] @ x, 0.0) / Gp[i]
            if ratio < step - 1e-15:
                step, block = ratio, i
        if not np.isfinite(step):
            return SolverSolution(x, float("-inf"), "unbounded", iterations=iterations)
        x = x + step * p
        if block >= 0:
            working.append(block)
            working.sort()
    else:
        return SolverSolution(x, sp.value(x), "numeric_failure", iterations=iterations, message="max_iter reached")

    x = np.clip(x, sp.lower, sp.upper)
    res = kkt_residual(sp, x)
    status = "optimal" if res <= cfg.opt_tol and sp.max_violation(x) <= cfg.feas_tol else "numeric_failure"
    return SolverSolution(
        point=x,
        objective_value=sp.value(x),
        status=status,
        active_set=active_set(sp, x),
        kkt_residual=res,
        iterations=iterations,
        extra={"working_set": tuple(int(labels[i]) for i in working)},
    )
