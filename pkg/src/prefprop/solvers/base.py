"""Solver result/config types and the KKT certificate shared by LP and QP."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from ..problem import ScalarizedProblem

STATUSES = ("optimal", "infeasible", "unbounded", "numeric_failure")


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-8
    opt_tol: float = 1e-8
    max_iter: int = 1000
    pivot_rule: str = "bland"
    # "lower": on a face of LP optima, return the vertex nearest the lower bounds
    tie_break: str = "lower"

    def __post_init__(self):
        if not (self.feas_tol > 0 and self.opt_tol > 0):
            raise ValueError("solver tolerances must be positive")
        if self.pivot_rule not in ("bland", "dantzig_with_bland_fallback"):
            raise ValueError(f"unknown pivot rule {self.pivot_rule!r}")
        if self.tie_break not in ("lower", "none"):
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")


@dataclass
class SolverSolution:
    point: np.ndarray
    objective_value: float
    status: str
    active_set: tuple[int, ...] = ()
    kkt_residual: float = float("inf")
    iterations: int = 0
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def inequality_rows(sp: ScalarizedProblem):
    """All inequalities as ``G x <= h``: constraint rows, then finite lower, then finite upper bounds.

    Returns ``(G, h, labels)`` where labels use the global active-set numbering:
    ``i`` for ``A_ub`` row i, ``p + q + j`` for the lower bound of variable j and
    ``p + q + n + j`` for its upper bound (``p``/``q`` inequality/equality rows).
    """
    n = sp.n
    p, q = len(sp.b_ub), len(sp.b_eq)
    rows = [sp.A_ub]
    rhs = [sp.b_ub]
    labels = list(range(p))
    eye = np.eye(n)
    lo = np.flatnonzero(np.isfinite(sp.lower))
    hi = np.flatnonzero(np.isfinite(sp.upper))
    rows += [-eye[lo], eye[hi]]
    rhs += [-sp.lower[lo], sp.upper[hi]]
    labels += [p + q + j for j in lo] + [p + q + n + j for j in hi]
    G = np.vstack(rows).reshape(-1, n)
    h = np.concatenate(rhs)
    return G, h, np.array(labels, dtype=int)


def active_set(sp: ScalarizedProblem, x, tol: float = 1e-7) -> tuple[int, ...]:
    """Global indices of equality rows and inequalities tight at ``x``."""
    p, q = len(sp.b_ub), len(sp.b_eq)
    G, h, labels = inequality_rows(sp)
    slack = h - G @ x
    tight = labels[slack <= tol * (1.0 + np.abs(h))]
    return tuple(sorted(int(i) for i in list(tight) + list(range(p, p + q))))


def active_rank(sp: ScalarizedProblem, x, tol: float = 1e-7) -> int:
    """Rank of the gradients of the constraints active at ``x``."""
    G, h, labels = inequality_rows(sp)
    slack = h - G @ x
    rows = [G[slack <= tol * (1.0 + np.abs(h))], sp.A_eq]
    A = np.vstack(rows)
    if A.size == 0:
        return 0
    return int(np.linalg.matrix_rank(A, tol=1e-9))


def kkt_residual(sp: ScalarizedProblem, point, active_tol: float = 1e-7) -> float:
    """Max of stationarity, primal feasibility and complementarity violations.

    Multipliers are fitted by nonnegative least squares over the constraints
    active at ``point`` (equality multipliers free), so the stationarity term
    is the distance from ``-grad f`` to the cone of active constraint normals.
    """
    x = np.asarray(point, dtype=float)
    if x.shape != (sp.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({sp.n},)")
    grad = sp.gradient(x)
    feas = sp.max_violation(x)
    G, h, _ = inequality_rows(sp)
    slack = h - G @ x
    act = slack <= active_tol * (1.0 + np.abs(h))
    cols = [G[act].T, sp.A_eq.T, -sp.A_eq.T]
    K = np.hstack(cols) if any(c.size for c in cols) else np.zeros((sp.n, 0))
    if K.shape[1] == 0:
        return max(float(np.max(np.abs(grad), initial=0.0)), feas)
    lam, _ = nnls(K, -grad, maxiter=50 * K.shape[1])
    stat = float(np.max(np.abs(grad + K @ lam), initial=0.0))
    n_act = int(act.sum())
    comp = float(np.max(lam[:n_act] * np.abs(slack[act]), initial=0.0))
    return max(stat, feas, comp)
