"""Embedded LP and convex-QP solvers."""

from .base import SolverConfig, SolverSolution, active_rank, active_set, inequality_rows, kkt_residual
from .lp import solve_lp
from .qp import solve_qp


def solve(sp, cfg=None):
    """Dispatch on problem kind: simplex for LPs, active set for convex QPs."""
    return solve_lp(sp, cfg) if sp.kind == "LP" else solve_qp(sp, cfg)


__all__ = [
    "SolverConfig",
    "SolverSolution",
    "active_rank",
    "active_set",
    "inequality_rows",
    "kkt_residual",
    "solve",
    "solve_lp",
    "solve_qp",
]
