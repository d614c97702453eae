"""Fréchet mean and variance of the optimal-design distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .preferences import PreferenceDistribution, SeededStream
from .propagate import DecisionDistribution, propagate
from .solvers import SolverConfig

N_BOOT = 2000


@dataclass
class FrechetSummary:
    scenario_label: str
    mean: np.ndarray
    variance: float
    n: int
    bootstrap_ci: tuple[float, float]
    dist_spec: dict | None = None
    n_failed: int = 0


def normalize_designs(designs, lower, upper) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper)) and np.all(upper > lower)):
        raise ValueError("Fréchet normalization needs finite bounds with upper > lower for every design variable")
    return (np.asarray(designs, dtype=float) - lower) / (upper - lower)


def frechet_variance(Z: np.ndarray) -> tuple[np.ndarray, float]:
    """Euclidean Fréchet mean (arithmetic mean) and variance, divisor ``n``.

    Deviations are accumulated relative to the first row so a point mass gives
    exactly zero instead of rounding noise.
    """
    W = Z - Z[0]
    shift = W.mean(axis=0)
    return Z[0] + shift, float(np.mean(np.sum((W - shift) ** 2, axis=1)))


def bootstrap_ci(Z: np.ndarray, stream: SeededStream, n_boot: int = N_BOOT, level: float = 0.99) -> tuple[float, float]:
    n = len(Z)
    gen = stream.generator()
    counts = gen.multinomial(n, np.full(n, 1.0 / n), size=n_boot)
    Z = Z - Z[0]
    sq = np.sum(Z**2, axis=1)
    means = counts @ Z / n
    var_b = counts @ sq / n - np.sum(means**2, axis=1)
    alpha = (1.0 - level) / 2
    lo, hi = np.quantile(np.maximum(var_b, 0.0), [alpha, 1 - alpha])
    return float(lo), float(hi)


def frechet_summary(
    dd: DecisionDistribution | np.ndarray,
    bounds,
    label: str = "",
    stream: SeededStream | None = None,
    n_boot: int = N_BOOT,
) -> FrechetSummary:
    """Fréchet mean/variance in the bound-normalized design space, with a 99% bootstrap CI."""
    designs = dd.designs if isinstance(dd, DecisionDistribution) else np.asarray(dd, dtype=float)
    if len(designs) == 0:
        raise ValueError("empty decision distribution")
    Z = normalize_designs(designs, *bounds)
    mean, var = frechet_variance(Z)
    ci = bootstrap_ci(Z, stream or SeededStream(0, 0), n_boot)
    spec = dd.dist_spec if isinstance(dd, DecisionDistribution) else None
    failed = dd.n_failed if isinstance(dd, DecisionDistribution) else 0
    return FrechetSummary(label, mean, var, len(Z), ci, spec, failed)


def scenario_sweep(
    problem,
    scenarios: list[tuple[str, PreferenceDistribution]],
    n: int,
    master_seed: int,
    workers: int = 1,
    cfg: SolverConfig | None = None,
) -> list[tuple[FrechetSummary, DecisionDistribution]]:
    """Propagate and summarize each scenario; scenario ``k`` uses stream ``k``."""
    if not scenarios:
        raise ValueError("at least one scenario is required")
    bounds = problem.design_bounds()
    out = []
    for k, (label, dist) in enumerate(scenarios):
        dd = propagate(problem, dist, n, master_seed, stream_index=k, workers=workers, cfg=cfg)
        summary = frechet_summary(dd, bounds, label, SeededStream(master_seed, 10_000 + k))
        out.append((summary, dd))
    return out
