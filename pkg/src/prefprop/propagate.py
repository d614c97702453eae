"""Monte Carlo propagation of preference draws to optimal designs."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .preferences import MVN, PreferenceDistribution, SeededStream, dist_to_spec, sample
from .problem import MultiObjectiveProblem, evaluate_objectives, scalarize
from .solvers import SolverConfig, solve

log = logging.getLogger(__name__)


class PropagationError(RuntimeError):
    def __init__(self, message, failures):
        super().__init__(message)
        self.failures = failures


@dataclass(frozen=True)
class DecisionSample:
    beta: np.ndarray
    x_star: np.ndarray  # design variables only
    objectives: np.ndarray
    status: str
    stream_index: int
    full_point: np.ndarray = field(repr=False, default=None)
    kkt_residual: float = 0.0


@dataclass
class DecisionDistribution:
    samples: list[DecisionSample]
    n_requested: int
    n_failed: int
    problem_id: str
    dist_spec: dict
    design_names: list[str]
    objective_names: list[str]
    failures: list[tuple[int, str, str]] = field(default_factory=list)

    def __post_init__(self):
        if len(self.samples) + self.n_failed != self.n_requested:
            raise ValueError("recorded + failed samples must equal requested samples")

    def __len__(self):
        return len(self.samples)

    @property
    def designs(self) -> np.ndarray:
        return np.array([s.x_star for s in self.samples]).reshape(len(self.samples), len(self.design_names))

    @property
    def betas(self) -> np.ndarray:
        return np.array([s.beta for s in self.samples])

    @property
    def objective_values(self) -> np.ndarray:
        return np.array([s.objectives for s in self.samples]).reshape(len(self.samples), len(self.objective_names))


def _solve_one(args):
    problem, beta, allow_nonpositive, cfg = args
    try:
        sp = scalarize(problem, beta, allow_nonpositive=allow_nonpositive)
    except ValueError as exc:
        return None, "invalid_weights", str(exc), 0.0
    sol = solve(sp, cfg)
    if sol.status != "optimal":
        return None, sol.status, sol.message, sol.kkt_residual
    return sol.point, sol.status, "", sol.kkt_residual


def propagate(
    problem: MultiObjectiveProblem,
    dist: PreferenceDistribution,
    n: int,
    master_seed: int,
    stream_index: int = 0,
    workers: int = 1,
    cfg: SolverConfig | None = None,
    max_failure_rate: float = 0.01,
) -> DecisionDistribution:
    """Sample ``n`` preference vectors, solve each scalarized problem, record optimizers.

    Preference row ``i`` is addressed as row ``i`` of stream
    ``(master_seed, stream_index)``, so results do not depend on ``workers``.
    Failed solves are excluded from the samples but counted; more than
    ``max_failure_rate`` failures raises :class:`PropagationError`.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if dist.dim != problem.m:
        raise ValueError(f"distribution dimension {dist.dim} != number of objectives {problem.m}")
    cfg = cfg or SolverConfig()
    betas = sample(dist, n, SeededStream(master_seed, stream_index))
    allow_nonpositive = isinstance(dist, MVN)
    jobs = [(problem, b, allow_nonpositive, cfg) for b in betas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_one, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        results = [_solve_one(j) for j in jobs]

    idx = problem.design_indices
    samples, failures = [], []
    for i, (beta, (point, status, message, kkt)) in enumerate(zip(betas, results)):
        if point is None:
            failures.append((i, status, message))
            continue
        samples.append(
            DecisionSample(
                beta=beta,
                x_star=point[idx],
                objectives=evaluate_objectives(problem, point, check=False),
                status=status,
                stream_index=i,
                full_point=point,
                kkt_residual=kkt,
            )
        )
    dd = DecisionDistribution(
        samples=samples,
        n_requested=n,
        n_failed=len(failures),
        problem_id=problem.name,
        dist_spec=dist_to_spec(dist),
        design_names=problem.design_names,
        objective_names=problem.objective_names,
        failures=failures,
    )
    if failures:
        log.warning("%d of %d solves failed", len(failures), n)
    if len(failures) > max_failure_rate * n:
        detail = "; ".join(f"#{i}: {s} {m}".strip() for i, s, m in failures[:10])
        raise PropagationError(f"{len(failures)} of {n} solves failed ({detail})", failures)
    return dd


# ---------------------------------------------------------------------------
# summaries


# clusters per sample above which a run is flagged continuous-like
CONTINUOUS_FRACTION = 0.25


@dataclass
class DiscreteSummary:
    support: list[tuple[np.ndarray, float, int]]
    cluster_tol: float
    n_samples: int
    continuous_like: bool

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p, _ in self.support])

    @property
    def points(self) -> np.ndarray:
        return np.array([x for x, _, _ in self.support])


def discretize(dd: DecisionDistribution, cluster_tol: float = 1e-6) -> DiscreteSummary:
    """Greedy max-norm clustering of the optimal designs in draw order.

    A sample joins the first cluster whose seed point is within ``cluster_tol``
    in every design coordinate; representatives are member means. The support
    is sorted by descending probability (first appearance breaks ties).
    """
    if not cluster_tol > 0:
        raise ValueError("cluster_tol must be positive")
    X = dd.designs
    seeds: list[np.ndarray] = []
    members: list[list[int]] = []
    seed_arr = np.zeros((0, X.shape[1]))
    for i, x in enumerate(X):
        if len(seeds):
            close = np.flatnonzero(np.max(np.abs(seed_arr - x), axis=1) <= cluster_tol)
            if close.size:
                members[close[0]].append(i)
                continue
        seeds.append(x)
        members.append([i])
        seed_arr = np.vstack([seed_arr, x])
    total = len(X)
    order = sorted(range(len(members)), key=lambda k: -len(members[k]))
    support = [(X[members[k]].mean(axis=0), len(members[k]) / total, len(members[k])) for k in order]
    return DiscreteSummary(support, cluster_tol, total, continuous_like=total > 0 and len(support) >= CONTINUOUS_FRACTION * total)


@dataclass
class Correlations:
    names: list[str]
    pearson: np.ndarray
    spearman: np.ndarray
    degenerate: np.ndarray  # per-variable: constant column


def _corr(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sd = X.std(axis=0)
    const = sd <= 1e-12 * np.maximum(1.0, np.abs(X).max(axis=0))
    Z = np.zeros_like(X)
    Z[:, ~const] = (X[:, ~const] - X[:, ~const].mean(axis=0)) / sd[~const]
    C = Z.T @ Z / len(X)
    C = np.clip((C + C.T) / 2, -1.0, 1.0)
    np.fill_diagonal(C, 1.0)
    return C, const


def correlations(dd: DecisionDistribution) -> Correlations:
    """Pearson and Spearman matrices of the design variables.

    Constant columns get zero off-diagonal entries and are flagged degenerate.
    """
    X = dd.designs
    if len(X) < 3:
        raise ValueError("correlations need at least 3 samples")
    pearson, const = _corr(X)
    ranks = np.column_stack([stats.rankdata(X[:, j]) for j in range(X.shape[1])])
    spearman, _ = _corr(ranks)
    spearman[const, :] = 0.0
    spearman[:, const] = 0.0
    np.fill_diagonal(spearman, 1.0)
    return Correlations(list(dd.design_names), pearson, spearman, const)


@dataclass
class Histogram:
    variable: str
    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray


def marginal_histograms(dd: DecisionDistribution, bins: int = 20, bounds=None) -> list[Histogram]:
    """Per-design-variable histograms over the variable bounds (sample range if unbounded)."""
    if bins < 1:
        raise ValueError("bins must be at least 1")
    X = dd.designs
    out = []
    for j, name in enumerate(dd.design_names):
        lo, hi = (bounds[0][j], bounds[1][j]) if bounds is not None else (-np.inf, np.inf)
        if not np.isfinite(lo):
            lo = float(X[:, j].min())
        if not np.isfinite(hi):
            hi = float(X[:, j].max())
        if hi <= lo:
            hi = lo + 1.0
        counts, edges = np.histogram(np.clip(X[:, j], lo, hi), bins=bins, range=(lo, hi))
        density = counts / (max(len(X), 1) * np.diff(edges))
        out.append(Histogram(name, edges, counts, density))
    return out
