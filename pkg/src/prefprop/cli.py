"""Command-line entry point: ``prefprop run | verify | demo``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .demos import CONTINUOUS_DEFAULTS, DISCRETE_DEFAULTS, discrete_distribution, switch_probability, toy_distribution
from .frechet import frechet_summary, scenario_sweep
from .pareto import compare_overlay, pareto_baseline
from .preferences import DEFAULT_EPS, LowAcceptanceError, SeededStream, TruncatedMVN, dist_from_spec, dist_to_spec
from .problem import BUILTIN_PROBLEMS, builtin_problem
from .problem_io import ProblemFileError, load_problem
from .propagate import PropagationError, correlations, discretize, marginal_histograms, propagate
from .reporting import (
    sigma_spec,
    write_correlations,
    write_csv,
    write_discrete,
    write_frechet,
    write_histograms,
    write_manifest,
    write_overlay,
    write_pareto,
    write_samples,
    write_sensitivity,
)
from .sensitivity import build_report
from .solvers import SolverConfig

log = logging.getLogger("prefprop")

OUT_ENV = "PREFPROP_OUT"
ANALYSES = ("discrete", "correlations", "histograms", "sensitivity", "frechet", "pareto", "overlay")
DEFAULT_ANALYSES = "discrete,correlations,histograms"
CONFIG_KEYS = {"problem", "distribution", "n", "seed", "workers", "out", "analyses", "scenario_file", "cluster_tol", "eps"}

# pareto streams live far from the per-scenario propagation streams
PARETO_STREAM = 20_000

TIE_BREAK_NOTE = (
    "LP optima on degenerate faces are reported at the vertex nearest the lower "
    "variable bounds; another solver may pick a different vertex of the same face, "
    "which shifts probability mass between support points without changing the support."
)


class ConfigError(ValueError):
    pass


def _default_out() -> str:
    return os.environ.get(OUT_ENV, "prefprop_out")


def _parse_json_arg(text: str, what: str):
    """Inline JSON, or a path to a JSON file."""
    path = Path(text)
    source = text
    if not text.lstrip().startswith(("{", "[")) and path.exists():
        source = path.read_text()
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _resolve_scenario_file(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    shipped = resources.files("prefprop") / "scenarios" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise ConfigError(f"scenario file {name!r} not found (shipped files live in prefprop/scenarios)")


def load_scenarios(name: str, eps: float | None):
    doc = _parse_json_arg(str(_resolve_scenario_file(name)), f"scenario file {name}")
    items = doc.get("scenarios") if isinstance(doc, dict) else None
    if not isinstance(items, list) or not items:
        raise ConfigError(f"scenario file {name}: field 'scenarios' must be a nonempty list")
    out = []
    for k, item in enumerate(items):
        try:
            out.append((str(item.get("label", f"scenario{k}")), dist_from_spec(item["distribution"], eps)))
        except (KeyError, TypeError, AttributeError):
            raise ConfigError(f"scenario file {name}: scenarios[{k}].distribution missing") from None
        except ValueError as exc:
            raise ConfigError(f"scenario file {name}: scenarios[{k}].distribution: {exc}") from None
    return out


def _load_problem(name: str):
    if name in BUILTIN_PROBLEMS:
        return builtin_problem(name)
    if Path(name).exists():
        try:
            return load_problem(name)
        except ProblemFileError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"--problem {name!r} is neither a builtin ({', '.join(BUILTIN_PROBLEMS)}) nor a file")


def _resolve_config(args) -> dict:
    cfg = {}
    if args.config:
        doc = _parse_json_arg(args.config, f"config {args.config}")
        if not isinstance(doc, dict):
            raise ConfigError(f"config {args.config}: top level must be an object")
        unknown = sorted(set(doc) - CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"config {args.config}: unknown field(s) {unknown}; allowed {sorted(CONFIG_KEYS)}")
        cfg.update(doc)
    for key in ("problem", "n", "seed", "workers", "out", "analyses", "scenario_file", "cluster_tol", "eps"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.dist is not None:
        cfg["distribution"] = _parse_json_arg(args.dist, "--dist")
    cfg.setdefault("problem", "case1_ackermann")
    cfg.setdefault("n", 1000)
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", 1)
    cfg.setdefault("out", _default_out())
    cfg.setdefault("analyses", DEFAULT_ANALYSES)
    cfg.setdefault("cluster_tol", 1e-6)

    if isinstance(cfg["analyses"], str):
        cfg["analyses"] = [a.strip() for a in cfg["analyses"].split(",") if a.strip()]
    bad = [a for a in cfg["analyses"] if a not in ANALYSES]
    if bad:
        raise ConfigError(f"analyses: unknown {bad}; choose from {list(ANALYSES)}")
    for key in ("n", "workers"):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            raise ConfigError(f"{key}: must be an integer >= 1, got {cfg[key]!r}")
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise ConfigError(f"seed: must be an integer in [0, 2^64), got {cfg['seed']!r}")
    if not cfg["cluster_tol"] > 0:
        raise ConfigError("cluster_tol: must be positive")
    if cfg.get("eps") is not None and not cfg["eps"] > 0:
        raise ConfigError("eps: must be positive")
    return cfg


def _distribution(cfg: dict, m: int):
    eps = cfg.get("eps")
    spec = cfg.get("distribution")
    if spec is None:
        # default preference model: TMVN(1, 0.5 I)
        spec = {"type": "tmvn", "mu": [1.0] * m, "sigma": 0.5}
    try:
        dist = dist_from_spec(spec, eps)
    except ValueError as exc:
        raise ConfigError(f"distribution: {exc}") from None
    if eps is not None and isinstance(dist, TruncatedMVN) and dist.eps != eps:
        dist = TruncatedMVN(dist.mu, dist.sigma, eps)
    if dist.dim != m:
        raise ConfigError(f"distribution: dimension {dist.dim} does not match the problem's {m} objectives")
    return dist


def cmd_run(args, quiet: bool = False) -> int:
    t0 = time.perf_counter()
    cfg = _resolve_config(args)
    problem = _load_problem(cfg["problem"])
    dist = _distribution(cfg, problem.m)
    scenarios = load_scenarios(cfg["scenario_file"], cfg.get("eps")) if cfg.get("scenario_file") else None
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"out: directory {out} is not writable ({exc})") from None
    solver_cfg = SolverConfig()
    analyses = cfg["analyses"]
    seed, workers = cfg["seed"], cfg["workers"]
    files, notes = [], []
    failures = {}

    dd = propagate(problem, dist, cfg["n"], seed, stream_index=0, workers=workers, cfg=solver_cfg)
    failures["main"] = dd.n_failed
    files.append(write_samples(out, dd))
    names = problem.design_names
    if "discrete" in analyses:
        summary = discretize(dd, cfg["cluster_tol"])
        files.append(write_discrete(out, summary, names))
        if summary.continuous_like:
            notes.append(f"continuous-like: {len(summary.support)} clusters from {summary.n_samples} samples")
        elif all(not o.is_quadratic for o in problem.objectives):
            notes.append(TIE_BREAK_NOTE)
    if "correlations" in analyses:
        files.append(write_correlations(out, correlations(dd)))
    if "histograms" in analyses:
        files.append(write_histograms(out, marginal_histograms(dd, bounds=problem.design_bounds())))
    if "sensitivity" in analyses:
        files += write_sensitivity(out, build_report(dd, problem, n_base=args.sobol_n, seed=seed))
    if "frechet" in analyses:
        if scenarios:
            results = scenario_sweep(problem, scenarios, cfg["n"], seed, workers, solver_cfg)
            for s, sdd in results:
                failures[s.scenario_label] = sdd.n_failed
            summaries = [s for s, _ in results]
        else:
            summaries = [frechet_summary(dd, problem.design_bounds(), "main", SeededStream(seed, 10_000))]
        files.append(write_frechet(out, summaries, problem.m, names))
    if "pareto" in analyses or "overlay" in analyses:
        ps = pareto_baseline(problem, args.pareto_n, SeededStream(seed, PARETO_STREAM))
        notes.append(f"pareto baseline: {ps.n_sampled} LHS draws, {ps.n_feasible} feasible, {len(ps.designs)} non-dominated")
        if "pareto" in analyses:
            files.append(write_pareto(out, ps, names, problem.objective_names))
        if "overlay" in analyses:
            rows = compare_overlay(ps, dd, problem, cfg["cluster_tol"])
            files.append(write_overlay(out, rows, names, problem.objective_names))

    config_echo = dict(cfg)
    config_echo["distribution"] = dist_to_spec(dist)
    config_echo["sobol_n"] = args.sobol_n
    config_echo["pareto_n"] = args.pareto_n
    write_manifest(out, config_echo, files, time.perf_counter() - t0, failures, notes)
    if not quiet:
        for n in notes:
            print(f"note: {n}")
        print(f"wrote {len(files)} files to {out}")
    return 0


def cmd_verify(args, quiet: bool = False) -> int:
    from .verify import run_checks

    only = [g.strip() for g in args.only.split(",")] if args.only else None
    tol = args.solver_tol
    cfg = SolverConfig(feas_tol=tol, opt_tol=tol)
    try:
        results = run_checks(only, cfg, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    width = max(len(r.name) for r in results)
    for r in results:
        if not quiet:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.group:<9} {r.name:<{width}}  {r.detail}")
    failed = sum(not r.passed for r in results)
    if not quiet:
        print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def cmd_demo(args, quiet: bool = False) -> int:
    if args.n < 1:
        raise ConfigError(f"n: must be an integer >= 1, got {args.n}")
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if args.which in ("discrete", "both"):
        rows = []
        for k, spec in enumerate(DISCRETE_DEFAULTS):
            _, p_emp = discrete_distribution(spec, args.n, SeededStream(args.seed, k))
            S = np.asarray(spec.sigma)
            rows.append(
                [spec.label, *spec.theta, sigma_spec({"sigma": S.tolist()}), switch_probability(spec), p_emp, args.n]
            )
        header = ["scenario", "theta_1", "theta_2", "sigma_spec", "p_upper_closed_form", "p_upper_empirical", "n"]
        files.append(write_csv(out / "demo_discrete.csv", header, rows))
    if args.which in ("continuous", "both"):
        hist_rows, curve_rows = [], []
        for k, spec in enumerate(CONTINUOUS_DEFAULTS):
            td = toy_distribution(spec, args.n, SeededStream(args.seed, 100 + k), bins=args.bins)
            counts, edges = np.histogram(td.xstar, bins=args.bins, range=(td.curve_x[0], td.curve_x[-1]))
            dens = counts / (len(td.xstar) * np.diff(edges))
            for b in range(args.bins):
                hist_rows.append([spec.label, b, edges[b], edges[b + 1], counts[b], dens[b]])
            for x, f, d in zip(td.curve_x, td.curve_f, td.curve_density):
                curve_rows.append([spec.label, x, f[0], f[1], d])
        files.append(write_csv(out / "demo_continuous_hist.csv", ["scenario", "bin", "lo", "hi", "count", "density"], hist_rows))
        files.append(write_csv(out / "demo_continuous_curve.csv", ["scenario", "x", "f1", "f2", "density"], curve_rows))
    if not quiet:
        print(f"wrote {', '.join(f.name for f in files)} to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prefprop", description="Propagate preference uncertainty to optimal designs.")
    ap.add_argument("--version", action="version", version=f"prefprop {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sample preferences, solve, and write analyses")
    run.add_argument("--problem", help=f"builtin name ({', '.join(BUILTIN_PROBLEMS)}) or problem JSON file")
    run.add_argument("--config", help="JSON run config (file or inline); flags override its fields")
    run.add_argument("--dist", help='preference distribution JSON, e.g. \'{"type":"tmvn","mu":[1,1,1,1],"sigma":0.5}\'')
    run.add_argument("--n", type=int, help="number of preference samples (default 1000)")
    run.add_argument("--seed", type=int, help="master seed (default 0)")
    run.add_argument("--workers", type=int, help="worker processes (default 1)")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./prefprop_out)")
    run.add_argument("--analyses", help=f"comma list from {','.join(ANALYSES)} (default {DEFAULT_ANALYSES})")
    run.add_argument("--scenario-file", dest="scenario_file", help="scenario JSON for the frechet sweep")
    run.add_argument("--cluster-tol", dest="cluster_tol", type=float, help="max-norm clustering tolerance (default 1e-6)")
    run.add_argument("--eps", type=float, help=f"TMVN truncation level (default {DEFAULT_EPS:g})")
    run.add_argument("--sobol-n", dest="sobol_n", type=int, default=8192, help="Sobol' base sample size")
    run.add_argument("--pareto-n", dest="pareto_n", type=int, default=20000, help="LHS draws for the Pareto baseline")
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run closed-form and oracle self checks")
    ver.add_argument("--only", help="comma list of check groups: toy,lp,qp,frechet,schema")
    ver.add_argument("--solver-tol", dest="solver_tol", type=float, default=1e-8, help="solver feas/opt tolerance")
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)

    demo = sub.add_parser("demo", help="closed-form one-variable examples")
    demo.add_argument("which", nargs="?", choices=("discrete", "continuous", "both"), default="both")
    demo.add_argument("--n", type=int, default=100_000)
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--bins", type=int, default=50)
    demo.add_argument("--out")
    demo.set_defaults(func=cmd_demo)
    return ap


def main(argv=None, quiet: bool = False) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args, quiet=quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PropagationError, LowAcceptanceError) as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"analysis failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
