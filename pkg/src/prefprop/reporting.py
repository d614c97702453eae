"""CSV writers, column schemas and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        if len(r) != len(header):
            raise ValueError(f"{path.name}: row has {len(r)} fields, header has {len(header)}")
        w.writerow([fmt(v) for v in r])
    path.write_text(buf.getvalue())
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# schemas: fixed leading columns, then per-problem name-expanded groups


def samples_header(m: int, design_names, objective_names) -> list[str]:
    return ["index", *[f"beta_{i + 1}" for i in range(m)], *design_names, *[f"f_{n}" for n in objective_names], "status"]


def discrete_header(design_names) -> list[str]:
    return [*design_names, "probability", "count"]


CORRELATIONS_HEADER = ["var_i", "var_j", "pearson", "spearman", "degenerate_i", "degenerate_j"]
SENSITIVITY_HEADER = ["objective", "variable", "sobol_first", "sobol_total", "shapley", "degenerate"]
HISTOGRAMS_HEADER = ["variable", "bin", "lo", "hi", "count", "density"]


def frechet_header(m: int, design_names) -> list[str]:
    return [
        "scenario",
        *[f"mu_{i + 1}" for i in range(m)],
        "sigma_spec",
        "variance",
        "ci_lo",
        "ci_hi",
        "n",
        *[f"mean_{n}" for n in design_names],
    ]


def pareto_header(design_names, objective_names) -> list[str]:
    return [*design_names, *[f"f_{n}" for n in objective_names]]


def overlay_header(design_names, objective_names) -> list[str]:
    return ["source", "probability", *[f"f_{n}" for n in objective_names], *design_names]


def expected_header(filename: str, m: int, design_names, objective_names) -> list[str] | None:
    return {
        "samples.csv": samples_header(m, design_names, objective_names),
        "discrete_summary.csv": discrete_header(design_names),
        "correlations.csv": CORRELATIONS_HEADER,
        "sensitivity.csv": SENSITIVITY_HEADER,
        "histograms.csv": HISTOGRAMS_HEADER,
        "frechet.csv": frechet_header(m, design_names),
        "pareto_baseline.csv": pareto_header(design_names, objective_names),
        "overlay.csv": overlay_header(design_names, objective_names),
    }.get(filename)


def validate_csv(path: Path, header: list[str]) -> list[str]:
    """Problems found in ``path`` against ``header`` (empty list when valid)."""
    got, rows = read_csv(path)
    errors = []
    if got != header:
        errors.append(f"{path.name}: header {got} != expected {header}")
    for k, r in enumerate(rows, start=2):
        if len(r) != len(header):
            errors.append(f"{path.name}: line {k} has {len(r)} fields, expected {len(header)}")
    return errors


# ---------------------------------------------------------------------------
# writers


def write_samples(out: Path, dd) -> Path:
    header = samples_header(len(dd.objective_names), dd.design_names, dd.objective_names)
    rows = ([s.stream_index, *s.beta, *s.x_star, *s.objectives, s.status] for s in dd.samples)
    return write_csv(out / "samples.csv", header, rows)


def write_discrete(out: Path, summary, design_names) -> Path:
    rows = ([*x, p, c] for x, p, c in summary.support)
    return write_csv(out / "discrete_summary.csv", discrete_header(design_names), rows)


def write_correlations(out: Path, corr) -> Path:
    rows = []
    for i, a in enumerate(corr.names):
        for j, b in enumerate(corr.names):
            rows.append([a, b, corr.pearson[i, j], corr.spearman[i, j], corr.degenerate[i], corr.degenerate[j]])
    return write_csv(out / "correlations.csv", CORRELATIONS_HEADER, rows)


def write_histograms(out: Path, hists) -> Path:
    rows = []
    for h in hists:
        for k in range(len(h.counts)):
            rows.append([h.variable, k, h.edges[k], h.edges[k + 1], h.counts[k], h.density[k]])
    return write_csv(out / "histograms.csv", HISTOGRAMS_HEADER, rows)


def write_sensitivity(out: Path, reports) -> list[Path]:
    nan = float("nan")
    rows = []
    for r in reports:
        for j, v in enumerate(r.variables):
            rows.append(
                [
                    r.objective_name,
                    v,
                    r.sobol_first[j] if r.sobol_first is not None else nan,
                    r.sobol_total[j] if r.sobol_total is not None else nan,
                    r.shapley[j] if r.shapley is not None else nan,
                    r.degenerate,
                ]
            )
    p1 = write_csv(out / "sensitivity.csv", SENSITIVITY_HEADER, rows)
    meta = {
        "estimators": reports[0].estimator_settings if reports else {},
        "n_model_evaluations": {r.objective_name: r.n_eval for r in reports},
    }
    p2 = out / "sensitivity_meta.json"
    p2.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return [p1, p2]


def sigma_spec(spec: dict | None) -> str:
    """Compact text for a distribution's spread: ``0.5I`` for isotropic, JSON otherwise."""
    if not spec:
        return ""
    if "sigma" in spec:
        S = np.asarray(spec["sigma"], dtype=float)
        if np.allclose(S, S[0, 0] * np.eye(len(S)), rtol=0, atol=0):
            return f"{fmt(S[0, 0])}I"
        return json.dumps(spec["sigma"])
    if "alpha" in spec:
        return "dirichlet" + json.dumps(spec["alpha"])
    return spec["type"]


def write_frechet(out: Path, summaries, m: int, design_names) -> Path:
    rows = []
    for s in summaries:
        mu = (s.dist_spec or {}).get("mu") or (s.dist_spec or {}).get("beta") or [float("nan")] * m
        rows.append([s.scenario_label, *mu, sigma_spec(s.dist_spec), s.variance, *s.bootstrap_ci, s.n, *s.mean])
    return write_csv(out / "frechet.csv", frechet_header(m, design_names), rows)


def write_pareto(out: Path, ps, design_names, objective_names) -> Path:
    rows = ([*x, *f] for x, f in zip(ps.designs, ps.objectives))
    return write_csv(out / "pareto_baseline.csv", pareto_header(design_names, objective_names), rows)


def write_overlay(out: Path, rows_in, design_names, objective_names) -> Path:
    rows = ([r.source, r.probability, *r.objectives, *r.design] for r in rows_in)
    return write_csv(out / "overlay.csv", overlay_header(design_names, objective_names), rows)


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, config: dict, files: list[Path], wall_time: float, failures: dict, notes=()) -> Path:
    import numpy
    import scipy

    manifest = {
        "config": config,
        "versions": {"prefprop": __version__, "numpy": numpy.__version__, "scipy": scipy.__version__},
        "files": {Path(f).name: sha256(f) for f in sorted(files, key=lambda p: Path(p).name)},
        "failures": failures,
        "notes": list(notes),
        "wall_time_s": wall_time,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
