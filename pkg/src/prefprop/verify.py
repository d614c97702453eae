"""End-to-end self checks: closed forms, solver oracles, Fréchet identities, output schemas."""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .demos import DiscreteToySpec, switch_probability, toy_xstar
from .frechet import frechet_summary, frechet_variance
from .pareto import lhs_sample
from .preferences import MVN, Dirichlet, SeededStream, isotropic_tmvn, sample
from .problem import (
    ScalarizedProblem,
    build_toy_continuous,
    build_toy_discrete,
    builtin_problem,
    complete_design,
    constraint_violation,
    scalarize,
)
from .propagate import propagate
from .solvers import SolverConfig, solve, solve_lp
from .solvers.vertices import vertex_minimum


@dataclass
class CheckResult:
    group: str
    name: str
    passed: bool
    detail: str


def random_lp(rng: np.random.Generator) -> ScalarizedProblem:
    """Bounded feasible LP with at most 6 variables and 10 inequality rows."""
    n = int(rng.integers(2, 7))
    p = int(rng.integers(1, 11))
    lower = rng.uniform(-5, 0, n)
    upper = lower + rng.uniform(1, 10, n)
    x0 = rng.uniform(lower, upper)
    A = rng.normal(size=(p, n))
    b = A @ x0 + rng.uniform(0, 3, p)
    return ScalarizedProblem(
        linear_cost=rng.normal(size=n),
        A_ub=A,
        b_ub=b,
        A_eq=np.zeros((0, n)),
        b_eq=np.zeros(0),
        lower=lower,
        upper=upper,
        var_names=tuple(f"v{i}" for i in range(n)),
    )


def small_reduced_cost_lp() -> ScalarizedProblem:
    # the optimum needs x0 to enter with reduced cost -1e-3
    return ScalarizedProblem(
        linear_cost=np.array([-1e-3, -1.0]),
        A_ub=np.array([[1.0, 1.0]]),
        b_ub=np.array([100.0]),
        A_eq=np.zeros((0, 2)),
        b_eq=np.zeros(0),
        lower=np.zeros(2),
        upper=np.full(2, 10.0),
        var_names=("v0", "v1"),
    )


def check_toy(cfg: SolverConfig, seed: int = 0) -> list[CheckResult]:
    out = []
    phi = 0.5 * (1.0 + math.erf(3.0 / math.sqrt(5.0) / math.sqrt(2.0)))
    p = switch_probability(DiscreteToySpec((1.0, 1.0), ((1.0, 0.0), (0.0, 1.0))))
    out.append(CheckResult("toy", "switch probability closed form", abs(p - phi) < 1e-12, f"{p:.12f} vs erf {phi:.12f}"))

    n = 4000
    spec = DiscreteToySpec((0.3, -0.1), ((1.0, 0.2), (0.2, 0.5)))
    dd = propagate(build_toy_discrete(), MVN(spec.theta, spec.sigma), n, seed, cfg=cfg)
    emp = float(np.mean(dd.designs[:, 0] == spec.x_range[1]))
    p = switch_probability(spec)
    tol = 3 * math.sqrt(p * (1 - p) / n)
    out.append(CheckResult("toy", "discrete toy through solver", abs(emp - p) <= tol, f"empirical {emp:.4f}, closed form {p:.4f}, tol {tol:.4f}"))

    prob = build_toy_continuous()
    betas = sample(Dirichlet((1.0, 1.0)), 200, SeededStream(seed, 1))
    worst = 0.0
    for beta in betas:
        sol = solve(scalarize(prob, beta), cfg)
        worst = max(worst, abs(sol.point[0] - toy_xstar(beta)) if sol.ok else math.inf)
    out.append(CheckResult("toy", "continuous toy through QP", worst <= 1e-8, f"max |x - closed form| = {worst:.2e}"))
    return out


def check_lp(cfg: SolverConfig, seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        sp = random_lp(rng)
        sol = solve_lp(sp, cfg)
        ref, _ = vertex_minimum(sp)
        gap = abs(sol.objective_value - ref) if sol.ok else math.inf
        worst = max(worst, gap / max(1.0, abs(ref)))
    sp = small_reduced_cost_lp()
    sol = solve_lp(sp, cfg)
    gap_small = abs(sol.objective_value - vertex_minimum(sp)[0]) if sol.ok else math.inf
    return [
        CheckResult("lp", "50 random LPs vs vertex enumeration", worst <= 1e-8, f"max relative gap {worst:.2e}"),
        CheckResult("lp", "small reduced cost vs vertex enumeration", gap_small <= 1e-8, f"gap {gap_small:.2e}"),
    ]


def check_qp(cfg: SolverConfig, seed: int = 0, n_solves: int = 20, n_lhs: int = 10_000) -> list[CheckResult]:
    prob = builtin_problem("case2_pivot_skid")
    betas = sample(isotropic_tmvn([1.0] * 4, 0.5), n_solves, SeededStream(seed, 2))
    lo, hi = prob.design_bounds()
    D = lhs_sample(np.column_stack([lo, hi]), n_lhs, SeededStream(seed, 3))
    X = complete_design(prob, D)
    X = X[constraint_violation(prob, X) <= 1e-9]
    worst_kkt, worst_gap = 0.0, -math.inf
    for beta in betas:
        sp = scalarize(prob, beta)
        sol = solve(sp, cfg)
        if not sol.ok:
            worst_kkt = math.inf
            continue
        worst_kkt = max(worst_kkt, sol.kkt_residual)
        best = min(sp.value(x) for x in X)
        worst_gap = max(worst_gap, sol.objective_value - best)
    return [
        CheckResult("qp", "case-study QP KKT residual", worst_kkt <= 1e-6, f"max KKT {worst_kkt:.2e}"),
        CheckResult("qp", "case-study QP beats LHS sample", worst_gap <= 1e-9, f"max (solver - best LHS) {worst_gap:.3g}"),
    ]


def check_frechet(seed: int = 0) -> list[CheckResult]:
    out = []
    bounds = (np.zeros(3), np.ones(3))
    s = frechet_summary(np.tile([0.2, 0.4, 0.9], (10, 1)), bounds, n_boot=200)
    out.append(CheckResult("frechet", "point mass has zero variance", s.variance == 0.0, f"{s.variance}"))
    p, q = np.array([0.1, 0.5, 0.3]), np.array([0.7, 0.2, 0.9])
    s = frechet_summary(np.array([p, q] * 5), bounds, n_boot=200)
    ref = float(np.sum((p - q) ** 2) / 4)
    out.append(CheckResult("frechet", "two-point variance", abs(s.variance - ref) < 1e-12, f"{s.variance} vs {ref}"))
    Z = np.random.default_rng(seed).uniform(size=(500, 6))
    mean, var = frechet_variance(Z)
    alt = float(np.mean(np.sum(Z**2, axis=1)) - np.sum(mean**2))
    out.append(CheckResult("frechet", "two-formula identity", abs(var - alt) < 1e-10, f"diff {abs(var - alt):.2e}"))
    return out


def check_schema(seed: int = 0) -> list[CheckResult]:
    from .cli import main
    from .reporting import expected_header, validate_csv

    prob = builtin_problem("case1_ackermann")
    with tempfile.TemporaryDirectory() as tmp:
        code = main(
            [
                "run",
                "--problem",
                "case1_ackermann",
                "--n",
                "600",
                "--seed",
                str(seed),
                "--out",
                tmp,
                "--analyses",
                "discrete,correlations,histograms,sensitivity,frechet,pareto,overlay",
                "--pareto-n",
                "500",
                "--sobol-n",
                "256",
            ],
            quiet=True,
        )
        errors = [] if code == 0 else [f"run exited with {code}"]
        files = sorted(Path(tmp).glob("*.csv"))
        for f in files:
            header = expected_header(f.name, prob.m, prob.design_names, prob.objective_names)
            if header is None:
                errors.append(f"unexpected file {f.name}")
            else:
                errors += validate_csv(f, header)
    return [CheckResult("schema", "run outputs match column schemas", not errors and len(files) == 8, "; ".join(errors) or f"{len(files)} files")]


CHECKS: dict[str, Callable[..., list[CheckResult]]] = {
    "toy": lambda cfg, seed: check_toy(cfg, seed),
    "lp": lambda cfg, seed: check_lp(cfg, seed),
    "qp": lambda cfg, seed: check_qp(cfg, seed),
    "frechet": lambda cfg, seed: check_frechet(seed),
    "schema": lambda cfg, seed: check_schema(seed),
}


def run_checks(only=None, cfg: SolverConfig | None = None, seed: int = 0) -> list[CheckResult]:
    cfg = cfg or SolverConfig()
    groups = list(CHECKS) if not only else list(only)
    unknown = [g for g in groups if g not in CHECKS]
    if unknown:
        raise ValueError(f"unknown check group(s) {unknown}; choose from {sorted(CHECKS)}")
    results = []
    for g in groups:
        try:
            results += CHECKS[g](cfg, seed)
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(g, "crashed", False, f"{type(exc).__name__}: {exc}"))
    return results
