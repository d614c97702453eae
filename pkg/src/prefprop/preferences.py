"""Preference-vector distributions with seeded, addressable random streams.

Every row of a sample is drawn from its own Philox counter block keyed by
``(master_seed, stream_index)``, so row ``r`` of a stream is the same no
matter how many rows are requested or which worker draws it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats

DEFAULT_EPS = 1e-6
_PROBE = 10_000


@dataclass(frozen=True)
class SeededStream:
    master_seed: int
    stream_index: int = 0

    def generator(self, row: int = 0) -> np.random.Generator:
        key = np.array([self.master_seed & (2**64 - 1), self.stream_index & (2**64 - 1)], dtype=np.uint64)
        counter = np.array([0, 0, row, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _as_matrix(sigma, m: int) -> np.ndarray:
    S = np.asarray(sigma, dtype=float)
    if S.ndim == 0:
        S = S * np.eye(m)
    if S.shape != (m, m):
        raise ValueError(f"sigma has shape {S.shape}, expected ({m}, {m})")
    if not np.allclose(S, S.T, atol=1e-12):
        raise ValueError("sigma must be symmetric")
    return S


def psd_factor(S: np.ndarray) -> np.ndarray:
    """``L`` with ``L @ L.T == S``; Cholesky, or eigen factor for singular PSD input."""
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        ev, V = np.linalg.eigh(S)
        if ev.min(initial=0.0) < -1e-10 * max(1.0, float(np.abs(ev).max(initial=0.0))):
            raise ValueError("sigma is not positive semidefinite") from None
        return V * np.sqrt(np.clip(ev, 0.0, None))


@dataclass(frozen=True)
class TruncatedMVN:
    """Normal ``N(mu, sigma)`` conditioned on every component being at least ``eps``."""

    mu: tuple
    sigma: tuple
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in np.ravel(self.mu)))
        S = _as_matrix(self.sigma, len(self.mu))
        object.__setattr__(self, "sigma", tuple(map(tuple, S)))
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        psd_factor(S)

    @property
    def dim(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class MVN:
    mu: tuple
    sigma: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in np.ravel(self.mu)))
        S = _as_matrix(self.sigma, len(self.mu))
        object.__setattr__(self, "sigma", tuple(map(tuple, S)))
        psd_factor(S)

    @property
    def dim(self) -> int:
        return len(self.mu)


@dataclass(frozen=True)
class Dirichlet:
    alpha: tuple

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in np.ravel(self.alpha)))
        if not all(a > 0 for a in self.alpha):
            raise ValueError("Dirichlet alpha must be componentwise positive")

    @property
    def dim(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class Fixed:
    beta: tuple

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(float(v) for v in np.ravel(self.beta)))
        if not all(b > 0 for b in self.beta):
            raise ValueError("fixed preference weights must be positive")

    @property
    def dim(self) -> int:
        return len(self.beta)


PreferenceDistribution = Union[TruncatedMVN, MVN, Dirichlet, Fixed]


class LowAcceptanceError(RuntimeError):
    pass


def _normal_rows(mu, L, gen: np.random.Generator, k: int) -> np.ndarray:
    return mu + gen.standard_normal((k, len(mu))) @ L.T


def _tmvn_row(dist: TruncatedMVN, mu, L, gen: np.random.Generator) -> np.ndarray:
    # rejection in small batches; acceptance >= 0.5 for the intended settings
    while True:
        cand = _normal_rows(mu, L, gen, 8)
        ok = np.all(cand >= dist.eps, axis=1)
        if ok.any():
            return cand[np.argmax(ok)]


def check_acceptance(dist: TruncatedMVN, stream: SeededStream, floor: float = 1e-4) -> float:
    """Empirical acceptance over a probe batch; raises when below ``floor``."""
    mu = np.array(dist.mu)
    L = psd_factor(np.array(dist.sigma))
    gen = stream.generator(row=2**62)
    rate = float(np.mean(np.all(_normal_rows(mu, L, gen, _PROBE) >= dist.eps, axis=1)))
    if rate < floor:
        raise LowAcceptanceError(
            f"truncated normal acceptance rate {rate:.2e} is below {floor:g}; "
            "move mu away from the truncation bound or use a different sampler configuration"
        )
    return rate


def sample(dist: PreferenceDistribution, n: int, stream: SeededStream, start: int = 0) -> np.ndarray:
    """Draw ``n`` preference vectors (rows ``start .. start + n - 1`` of ``stream``)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = range(start, start + n)
    if isinstance(dist, Fixed):
        return np.tile(np.array(dist.beta), (n, 1))
    if isinstance(dist, Dirichlet):
        alpha = np.array(dist.alpha)
        out = np.empty((n, len(alpha)))
        for i, r in enumerate(rows):
            g = stream.generator(r).standard_gamma(alpha)
            out[i] = g / g.sum()
        return out
    mu = np.array(dist.mu)
    L = psd_factor(np.array(dist.sigma))
    out = np.empty((n, len(mu)))
    if isinstance(dist, MVN):
        for i, r in enumerate(rows):
            out[i] = _normal_rows(mu, L, stream.generator(r), 1)[0]
        return out
    check_acceptance(dist, stream)
    for i, r in enumerate(rows):
        out[i] = _tmvn_row(dist, mu, L, stream.generator(r))
    return out


def truncation_acceptance(dist: TruncatedMVN, n_mc: int = 200_000, seed: int = 0) -> float:
    """Probability that an untruncated draw already has every component >= eps.

    Exact for diagonal covariance (product of normal tails); otherwise the
    orthant probability from scipy's multivariate normal CDF.
    """
    mu = np.array(dist.mu)
    S = np.array(dist.sigma)
    var = np.diag(S)
    if np.allclose(S, np.diag(var)):
        sd = np.sqrt(var)
        p = np.where(sd > 0, stats.norm.sf((dist.eps - mu) / np.where(sd > 0, sd, 1.0)), (mu >= dist.eps) * 1.0)
        return float(np.prod(p))
    try:
        return float(
            stats.multivariate_normal(mean=-mu, cov=S, allow_singular=True).cdf(np.full(len(mu), -dist.eps))
        )
    except (ValueError, np.linalg.LinAlgError):
        gen = SeededStream(seed).generator()
        L = psd_factor(S)
        return float(np.mean(np.all(_normal_rows(mu, L, gen, n_mc) >= dist.eps, axis=1)))


def isotropic_tmvn(mu, variance: float, eps: float = DEFAULT_EPS) -> TruncatedMVN:
    m = len(mu)
    return TruncatedMVN(tuple(mu), tuple(map(tuple, variance * np.eye(m))), eps)


# ---------------------------------------------------------------------------
# JSON-compatible specs


def dist_from_spec(spec: dict, eps: float | None = None) -> PreferenceDistribution:
    """Parse ``{"type": "tmvn" | "mvn" | "dirichlet" | "fixed", ...}``."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("distribution spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "tmvn":
            mu = spec["mu"]
            sigma = spec.get("sigma", 1.0)
            return TruncatedMVN(mu, _expand_sigma(sigma, len(mu)), spec.get("eps", eps if eps is not None else DEFAULT_EPS))
        if kind == "mvn":
            mu = spec["mu"]
            return MVN(mu, _expand_sigma(spec.get("sigma", 1.0), len(mu)))
        if kind == "dirichlet":
            return Dirichlet(spec["alpha"])
        if kind == "fixed":
            return Fixed(spec["beta"])
    except KeyError as exc:
        raise ValueError(f"distribution spec of type {kind!r} is missing field {exc.args[0]!r}") from None
    raise ValueError(f"unknown distribution type {kind!r}")


def _expand_sigma(sigma, m):
    S = np.asarray(sigma, dtype=float)
    return S * np.eye(m) if S.ndim == 0 else S


def dist_to_spec(dist: PreferenceDistribution) -> dict:
    if isinstance(dist, TruncatedMVN):
        return {"type": "tmvn", "mu": list(dist.mu), "sigma": [list(r) for r in dist.sigma], "eps": dist.eps}
    if isinstance(dist, MVN):
        return {"type": "mvn", "mu": list(dist.mu), "sigma": [list(r) for r in dist.sigma]}
    if isinstance(dist, Dirichlet):
        return {"type": "dirichlet", "alpha": list(dist.alpha)}
    return {"type": "fixed", "beta": list(dist.beta)}
