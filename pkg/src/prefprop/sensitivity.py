"""Variance-based sensitivity of objective outcomes to the optimal design.

Sobol' indices use pick-freeze matrices built from independently resampled
columns of the design sample, i.e. the empirical marginals with dependence
removed. Shapley effects keep the dependence: each subset value
``Var(E[Y | X_S])`` is estimated by averaging ``Y`` over nearest neighbours
in the standardized ``S`` coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np

from .preferences import SeededStream
from .problem import MultiObjectiveProblem, design_objectives

MAX_SHAPLEY_DIM = 12


@dataclass
class SobolResult:
    first: np.ndarray | None
    total: np.ndarray | None
    variance: float
    degenerate: bool = False


@dataclass
class SensitivityReport:
    objective_name: str
    variables: list[str]
    sobol_first: np.ndarray | None
    sobol_total: np.ndarray | None
    shapley: np.ndarray | None
    n_eval: int
    estimator_settings: dict = field(default_factory=dict)
    degenerate: bool = False


def _is_degenerate(y: np.ndarray) -> bool:
    var = float(np.var(y))
    return var <= 1e-14 * max(1.0, float(np.mean(y**2)))


def sobol_indices(
    samples: np.ndarray,
    model: Callable[[np.ndarray], np.ndarray],
    n_base: int = 8192,
    stream: SeededStream | None = None,
) -> SobolResult:
    """First-order (Saltelli 2010) and total (Jansen) pick-freeze estimates.

    Estimates are returned as computed; a first-order value above its total
    is possible under sampling noise and is not clamped.
    """
    if n_base < 256:
        raise ValueError("n_base must be at least 256")
    X = np.asarray(samples, dtype=float)
    n, d = X.shape
    gen = (stream or SeededStream(0)).generator()
    A = np.column_stack([X[gen.integers(0, n, n_base), j] for j in range(d)])
    B = np.column_stack([X[gen.integers(0, n, n_base), j] for j in range(d)])
    yA, yB = model(A), model(B)
    var = float(np.var(np.concatenate([yA, yB])))
    if _is_degenerate(np.concatenate([yA, yB])):
        return SobolResult(None, None, var, degenerate=True)
    first = np.empty(d)
    total = np.empty(d)
    for i in range(d):
        ABi = A.copy()
        ABi[:, i] = B[:, i]
        yABi = model(ABi)
        first[i] = np.mean(yB * (yABi - yA)) / var
        total[i] = 0.5 * np.mean((yA - yABi) ** 2) / var
    return SobolResult(first, total, var)


def _standardize(X: np.ndarray) -> np.ndarray:
    sd = X.std(axis=0)
    sd[sd <= 0] = 1.0
    return (X - X.mean(axis=0)) / sd


def _conditional_means(Zs: np.ndarray, Y: np.ndarray, eval_idx: np.ndarray, knn: int, chunk: int = 512) -> np.ndarray:
    """Mean of ``Y`` over the ``knn`` nearest neighbours of each evaluation point.

    A point that shares its exact coordinates with other sample points (an
    atom of the design distribution) is conditioned on that atom alone.
    Otherwise every point tied with the k-th nearest distance is included.
    """
    n = Zs.shape[0]
    k = min(knn, n)
    out = np.empty((len(eval_idx), Y.shape[1]))
    sq = np.sum(Zs**2, axis=1)
    for start in range(0, len(eval_idx), chunk):
        rows = eval_idx[start : start + chunk]
        D = sq[rows, None] + sq[None, :] - 2.0 * Zs[rows] @ Zs.T
        np.maximum(D, 0.0, out=D)
        exact = D <= 1e-18 * (1.0 + sq[rows, None] + sq[None, :])
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        W = D <= kth[:, None] * (1 + 1e-9) + 1e-12
        atom = exact.sum(axis=1) >= 2
        W[atom] = exact[atom]
        out[start : start + len(rows)] = (W @ Y) / W.sum(axis=1, keepdims=True)
    return out


def subset_values(
    samples: np.ndarray, Y: np.ndarray, knn: int = 50, eval_idx: np.ndarray | None = None
) -> np.ndarray:
    """``v[mask, l] = Var(E[Y_l | X_S])`` for every subset mask of the columns.

    ``v[0] = 0`` and ``v[full] = Var(Y)`` exactly; proper subsets use the
    nearest-neighbour regression estimate.
    """
    X = np.asarray(samples, dtype=float)
    Y = np.asarray(Y, dtype=float).reshape(len(X), -1)
    n, d = X.shape
    Z = _standardize(X)
    idx = np.arange(n) if eval_idx is None else eval_idx
    full = (1 << d) - 1
    v = np.zeros((1 << d, Y.shape[1]))
    v[full] = Y.var(axis=0)
    for mask in range(1, full):
        cols = [j for j in range(d) if mask >> j & 1]
        m = _conditional_means(Z[:, cols], Y, idx, knn)
        v[mask] = np.mean((m - Y.mean(axis=0)) ** 2, axis=0)
    return v


def shapley_from_values(v: np.ndarray, d: int) -> np.ndarray:
    """Exact Shapley allocation of ``v[full] - v[0]`` from all subset values."""
    phi = np.zeros((d,) + v.shape[1:])
    weights = [factorial(s) * factorial(d - s - 1) / factorial(d) for s in range(d)]
    for mask in range(1 << d):
        size = bin(mask).count("1")
        for i in range(d):
            if mask >> i & 1:
                continue
            phi[i] += weights[size] * (v[mask | (1 << i)] - v[mask])
    return phi


def shapley_effects(
    samples: np.ndarray,
    model: Callable[[np.ndarray], np.ndarray],
    knn: int = 50,
    stream: SeededStream | None = None,
    max_eval: int = 4000,
) -> np.ndarray | None:
    """Shapley shares of ``Var(Y)`` (summing to 1); ``None`` if ``Y`` is constant.

    When the sample has more than ``max_eval`` rows, conditional means are
    evaluated on a seeded subset of rows (neighbours still come from all rows).
    """
    X = np.asarray(samples, dtype=float)
    n, d = X.shape
    if d > MAX_SHAPLEY_DIM:
        raise ValueError(f"exact Shapley enumeration supports at most {MAX_SHAPLEY_DIM} inputs, got {d}")
    if n < 500:
        raise ValueError("Shapley estimation needs at least 500 samples")
    y = np.asarray(model(X), dtype=float)
    if _is_degenerate(y):
        return None
    eval_idx = _eval_rows(n, max_eval, stream)
    v = subset_values(X, y[:, None], knn, eval_idx)[:, 0]
    return shapley_from_values(v, d) / v[-1]


def _eval_rows(n: int, max_eval: int, stream: SeededStream | None) -> np.ndarray:
    if n <= max_eval:
        return np.arange(n)
    gen = (stream or SeededStream(0)).generator()
    return np.sort(gen.choice(n, size=max_eval, replace=False))


def build_report(
    dd,
    problem: MultiObjectiveProblem,
    n_base: int = 8192,
    knn: int = 50,
    seed: int = 0,
    max_eval: int = 4000,
) -> list[SensitivityReport]:
    """One report per objective of ``Y_l = f_l(X)`` over the optimal designs.

    Objectives are re-evaluated from the design variables alone (auxiliaries
    set epigraph-tight), so the pick-freeze points need no solver.
    """
    X = dd.designs
    if len(X) == 0:
        raise ValueError("empty decision distribution")
    n, d = X.shape
    Y = design_objectives(problem, X)
    settings = {
        "sobol": "saltelli2010-first/jansen-total, independent column bootstrap",
        "n_base": n_base,
        "shapley": "exact subset enumeration, kNN conditional means",
        "knn": knn,
        "standardize": True,
        "seed": seed,
        "n_samples": n,
    }
    shap_ok = d <= MAX_SHAPLEY_DIM and n >= 500
    degenerate = [_is_degenerate(Y[:, l]) for l in range(problem.m)]
    phi = None
    if shap_ok and not all(degenerate):
        eval_idx = _eval_rows(n, max_eval, SeededStream(seed, 999))
        live = [l for l in range(problem.m) if not degenerate[l]]
        v = subset_values(X, Y[:, live], knn, eval_idx)
        phi = dict(zip(live, (shapley_from_values(v, d) / v[-1]).T))
    reports = []
    for l, obj in enumerate(problem.objectives):
        if degenerate[l]:
            reports.append(
                SensitivityReport(obj.name, list(dd.design_names), None, None, None, n, settings, degenerate=True)
            )
            continue
        model = lambda Xq, l=l: design_objectives(problem, Xq)[:, l]  # noqa: E731
        sob = sobol_indices(X, model, n_base, SeededStream(seed, l))
        reports.append(
            SensitivityReport(
                obj.name,
                list(dd.design_names),
                sob.first,
                sob.total,
                phi[l] if phi is not None else None,
                n_base * (d + 2),
                settings,
                degenerate=sob.degenerate,
            )
        )
    return reports
