"""Preference-free baseline: Latin hypercube sampling plus non-dominated filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .preferences import SeededStream
from .problem import MultiObjectiveProblem, complete_design, constraint_violation, design_objectives
from .propagate import DecisionDistribution, discretize


@dataclass
class ParetoSet:
    designs: np.ndarray
    objectives: np.ndarray
    n_sampled: int
    n_feasible: int
    indices: np.ndarray  # positions within the feasible sample


def lhs_sample(bounds, n: int, stream: SeededStream) -> np.ndarray:
    """``n`` points with exactly one per equal-width stratum in every coordinate."""
    if n < 1:
        raise ValueError("n must be at least 1")
    B = np.asarray(bounds, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(B)):
        raise ValueError("Latin hypercube sampling needs finite bounds")
    # scipy spawns child generators, which a bare Philox bit generator cannot do
    seed = int(stream.generator().integers(0, 2**63))
    U = qmc.LatinHypercube(d=len(B), seed=seed).random(n)
    return B[:, 0] + U * (B[:, 1] - B[:, 0])


def _minimization_view(F: np.ndarray, senses) -> np.ndarray:
    flip = np.array([-1.0 if s == "max" else 1.0 for s in senses])
    return np.asarray(F, dtype=float) * flip


def non_dominated(F: np.ndarray, senses) -> np.ndarray:
    """Indices (ascending) of rows of ``F`` not dominated by any other row.

    After a lexicographic sort a dominating row always precedes the rows it
    dominates, so one pass against the current survivors suffices.
    """
    G = _minimization_view(F, senses)
    if len(G) == 0:
        return np.zeros(0, dtype=int)
    order = np.lexsort(G.T[::-1])
    keep: list[int] = []
    kept = np.zeros((0, G.shape[1]))
    for i in order:
        g = G[i]
        if len(keep):
            le = np.all(kept <= g, axis=1)
            lt = np.any(kept < g, axis=1)
            if np.any(le & lt):
                continue
        keep.append(i)
        kept = np.vstack([kept, g])
    return np.sort(np.array(keep, dtype=int))


def pareto_filter(designs, objectives, senses, n_sampled: int | None = None) -> ParetoSet:
    idx = non_dominated(objectives, senses)
    designs = np.asarray(designs, dtype=float)
    objectives = np.asarray(objectives, dtype=float)
    n = len(objectives)
    return ParetoSet(designs[idx], objectives[idx], n_sampled if n_sampled is not None else n, n, idx)


def pareto_baseline(
    problem: MultiObjectiveProblem, n: int = 20000, stream: SeededStream | None = None, feas_tol: float = 1e-8
) -> ParetoSet:
    """LHS over the design box, infeasible draws discarded, then non-dominated filter."""
    stream = stream or SeededStream(0, 0)
    lo, hi = problem.design_bounds()
    D = lhs_sample(np.column_stack([lo, hi]), n, stream)
    feasible = constraint_violation(problem, complete_design(problem, D)) <= feas_tol
    D = D[feasible]
    F = design_objectives(problem, D)
    senses = [o.sense for o in problem.objectives]
    return pareto_filter(D, F, senses, n_sampled=n)


def dominated_beyond(points, reference, senses, tol: float = 1e-6) -> np.ndarray:
    """Mask of ``points`` that some ``reference`` row beats by more than ``tol`` in every objective."""
    P = _minimization_view(np.atleast_2d(points), senses)
    R = _minimization_view(np.atleast_2d(reference), senses)
    out = np.zeros(len(P), dtype=bool)
    for i, p in enumerate(P):
        out[i] = bool(np.any(np.all(R < p - tol, axis=1)))
    return out


@dataclass
class OverlayRow:
    source: str  # "pareto" or "preference"
    objectives: np.ndarray
    probability: float
    design: np.ndarray


def compare_overlay(
    pareto: ParetoSet, dd: DecisionDistribution | None, problem: MultiObjectiveProblem, cluster_tol: float = 1e-6
) -> list[OverlayRow]:
    """Baseline cloud plus preference-aware points weighted by empirical probability."""
    rows = [OverlayRow("pareto", f, float("nan"), x) for x, f in zip(pareto.designs, pareto.objectives)]
    if dd is None or len(dd) == 0:
        return rows
    summary = discretize(dd, cluster_tol)
    reps = summary.points
    F = design_objectives(problem, reps)
    rows += [OverlayRow("preference", f, p, x) for x, f, p in zip(reps, F, summary.probabilities)]
    return rows
