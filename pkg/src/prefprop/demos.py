"""Closed-form one-variable examples used as analytic cross-checks.

The discrete toy maximizes two linear objectives ``a_i + b_i x`` over an
interval, so the optimizer jumps between the endpoints depending on the sign
of ``beta . b``. The continuous toy maximizes two concave quadratics
``a_i - b_i x - x**2`` over the real line and has a unique interior optimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .preferences import MVN, Dirichlet, SeededStream, psd_factor, sample


@dataclass(frozen=True)
class DiscreteToySpec:
    theta: tuple = (1.0, 1.0)
    sigma: tuple = ((1.0, 0.0), (0.0, 1.0))
    a: tuple = (-15.0, -55.0)
    b: tuple = (1.0, 2.0)
    x_range: tuple = (0.0, 15.0)
    label: str = ""

    def __post_init__(self):
        lo, hi = self.x_range
        if not lo < hi:
            raise ValueError("x_range must satisfy lo < hi")
        psd_factor(np.asarray(self.sigma, dtype=float))


@dataclass(frozen=True)
class ContinuousToySpec:
    alpha: tuple = (1.0, 1.0)
    b: tuple = (1.0, 3.0)
    a: tuple = (1.0, 2.0)
    label: str = ""

    def __post_init__(self):
        if len(self.alpha) != 2 or min(self.alpha) <= 0:
            raise ValueError("alpha must be two positive numbers")


# scenario defaults: same mean sign at two concentrations, then the opposite sign
DISCRETE_DEFAULTS = (
    DiscreteToySpec((1.0, 1.0), ((1.0, 0.0), (0.0, 1.0)), label="theta=(1,1) sigma=I"),
    DiscreteToySpec((1.0, 1.0), ((0.1, 0.0), (0.0, 0.1)), label="theta=(1,1) sigma=0.1I"),
    DiscreteToySpec((-1.0, -1.0), ((0.1, 0.0), (0.0, 0.1)), label="theta=(-1,-1) sigma=0.1I"),
)

CONTINUOUS_DEFAULTS = (
    ContinuousToySpec((0.5, 0.5), label="Dir(0.5,0.5)"),
    ContinuousToySpec((1.0, 1.0), label="Dir(1,1)"),
    ContinuousToySpec((2.0, 2.0), label="Dir(2,2)"),
    ContinuousToySpec((1.0, 0.5), label="Dir(1,0.5)"),
    ContinuousToySpec((0.5, 1.0), label="Dir(0.5,1)"),
)


def switch_probability(spec: DiscreteToySpec) -> float:
    """``P(x* = upper endpoint) = Phi(b.theta / sqrt(b' Sigma b))``."""
    b = np.asarray(spec.b, dtype=float)
    mean = float(b @ np.asarray(spec.theta, dtype=float))
    var = float(b @ np.asarray(spec.sigma, dtype=float) @ b)
    if var <= 0.0:
        if mean == 0.0:
            raise ValueError("switch probability undefined: b'Sigma b = 0 and b.theta = 0")
        return 1.0 if mean > 0 else 0.0
    return float(ndtr(mean / math.sqrt(var)))


def discrete_xstar(beta, spec: DiscreteToySpec) -> np.ndarray:
    """Endpoint maximizer of ``beta . (a + b x)``; the lower endpoint on a tie."""
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    lo, hi = spec.x_range
    return np.where(beta @ np.asarray(spec.b, dtype=float) > 0, hi, lo)


def toy_xstar(beta, b=(1.0, 3.0)):
    """Maximizer ``-beta.b / (2 (beta_1 + beta_2))`` of the continuous toy utility."""
    beta = np.asarray(beta, dtype=float)
    s = beta.sum(axis=-1)
    if np.any(s <= 0):
        raise ValueError("preference weights must satisfy beta_1 + beta_2 > 0")
    x = -(beta @ np.asarray(b, dtype=float)) / (2.0 * s)
    return float(x) if np.ndim(x) == 0 else x


@dataclass
class ToyDistribution:
    label: str
    xstar: np.ndarray
    curve_x: np.ndarray
    curve_f: np.ndarray  # (len(curve_x), 2)
    curve_density: np.ndarray  # histogram density of x* evaluated on curve_x
    extra: dict = field(default_factory=dict)


def toy_objectives(x, spec: ContinuousToySpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)[..., None]
    return np.asarray(spec.a) - np.asarray(spec.b) * x - x**2


def toy_distribution(spec: ContinuousToySpec, n: int, stream: SeededStream, grid: int = 201, bins: int = 50):
    """Dirichlet preference draws pushed through :func:`toy_xstar`, plus the trade-off curve."""
    if n < 1:
        raise ValueError("n must be at least 1")
    betas = sample(Dirichlet(spec.alpha), n, stream)
    xs = toy_xstar(betas, spec.b)
    b = np.asarray(spec.b, dtype=float)
    lo, hi = -b.max() / 2.0, -b.min() / 2.0
    curve_x = np.linspace(lo, hi, grid)
    counts, edges = np.histogram(xs, bins=bins, range=(lo, hi))
    dens = counts / (n * np.diff(edges))
    which = np.clip(np.searchsorted(edges, curve_x, side="right") - 1, 0, bins - 1)
    return ToyDistribution(spec.label, np.atleast_1d(xs), curve_x, toy_objectives(curve_x, spec), dens[which])


def discrete_distribution(spec: DiscreteToySpec, n: int, stream: SeededStream):
    """MVN preference draws pushed through the endpoint rule; returns (x*, empirical P(upper))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    betas = sample(MVN(spec.theta, spec.sigma), n, stream)
    xs = discrete_xstar(betas, spec)
    return xs, float(np.mean(xs == spec.x_range[1]))
