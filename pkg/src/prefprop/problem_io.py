"""JSON problem-spec files.

Layout (``null`` bounds mean unbounded)::

    {
      "name": "...",
      "variables": [{"name", "lower", "upper", "kind", "epigraph": [affine, ...]}],
      "constraints": [{"name", "lhs": affine, "relation": "<=" | ">=" | "==", "rhs"}],
      "objectives": [{"name", "sense_in_utility": 1 | -1,
                      "affine": affine | "quadratic": {"scale", "direction": affine,
                                                       "linear": affine, "offset"}}]
    }

where ``affine`` is ``{"coefficients": {var: coef}, "constant": c}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .problem import (
    AffineForm,
    LinearConstraint,
    MultiObjectiveProblem,
    Objective,
    QuadraticForm,
    ScalarizedProblem,
    VariableSpec,
)

_NUM = {"type": "number"}
_BOUND = {"type": ["number", "null"]}
_AFFINE = {
    "type": "object",
    "properties": {
        "coefficients": {"type": "object", "additionalProperties": _NUM},
        "constant": _NUM,
    },
    "required": ["coefficients"],
    "additionalProperties": False,
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["variables", "constraints", "objectives"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "variables": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "lower": _BOUND,
                    "upper": _BOUND,
                    "kind": {"enum": ["design", "auxiliary"]},
                    "epigraph": {"type": "array", "items": _AFFINE},
                },
            },
        },
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["lhs", "relation"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "lhs": _AFFINE,
                    "relation": {"enum": ["<=", ">=", "=="]},
                    "rhs": _NUM,
                },
            },
        },
        "objectives": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "sense_in_utility": {"enum": [1, -1]},
                    "affine": _AFFINE,
                    "quadratic": {
                        "type": "object",
                        "required": ["scale", "direction"],
                        "additionalProperties": False,
                        "properties": {
                            "scale": _NUM,
                            "direction": _AFFINE,
                            "linear": _AFFINE,
                            "offset": _NUM,
                        },
                    },
                },
                "oneOf": [{"required": ["affine"]}, {"required": ["quadratic"]}],
            },
        },
    },
}


class ProblemFileError(ValueError):
    """Invalid problem file; the message names the offending field path."""


def _path(err) -> str:
    parts = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
    return "$" + parts


def _affine(d: dict) -> AffineForm:
    return AffineForm({k: float(v) for k, v in d["coefficients"].items()}, float(d.get("constant", 0.0)))


def _bound(v, default: float) -> float:
    return default if v is None else float(v)


def problem_from_dict(doc: dict) -> MultiObjectiveProblem:
    try:
        jsonschema.validate(doc, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ProblemFileError(f"{_path(err)}: {err.message}") from None
    variables = [
        VariableSpec(
            v["name"],
            _bound(v.get("lower"), -math.inf),
            _bound(v.get("upper"), math.inf),
            v.get("kind", "design"),
            tuple(_affine(e) for e in v.get("epigraph", ())),
        )
        for v in doc["variables"]
    ]
    constraints = [
        LinearConstraint(_affine(c["lhs"]), c["relation"], float(c.get("rhs", 0.0)), c.get("name", ""))
        for c in doc["constraints"]
    ]
    objectives = []
    for o in doc["objectives"]:
        if "affine" in o:
            form = _affine(o["affine"])
        else:
            q = o["quadratic"]
            form = QuadraticForm(
                _affine(q["direction"]),
                float(q["scale"]),
                _affine(q["linear"]) if "linear" in q else AffineForm(),
                float(q.get("offset", 0.0)),
            )
        objectives.append(Objective(o["name"], form, int(o.get("sense_in_utility", 1))))
    try:
        return MultiObjectiveProblem(doc.get("name", "problem"), variables, constraints, objectives)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from None


def load_problem(path) -> MultiObjectiveProblem:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return problem_from_dict(doc)
    except ProblemFileError as exc:
        raise ProblemFileError(f"{path}: {exc}") from None


def _affine_dict(a: AffineForm) -> dict:
    return {"coefficients": {k: float(v) for k, v in a.coefficients.items()}, "constant": float(a.constant)}


def _bound_out(v: float):
    return None if math.isinf(v) else float(v)


def problem_to_dict(problem: MultiObjectiveProblem) -> dict:
    objectives = []
    for o in problem.objectives:
        entry = {"name": o.name, "sense_in_utility": o.sign_in_utility}
        if isinstance(o.form, QuadraticForm):
            entry["quadratic"] = {
                "scale": float(o.form.scale),
                "direction": _affine_dict(o.form.direction),
                "linear": _affine_dict(o.form.linear),
                "offset": float(o.form.offset),
            }
        else:
            entry["affine"] = _affine_dict(o.form)
        objectives.append(entry)
    return {
        "name": problem.name,
        "variables": [
            {
                "name": v.name,
                "lower": _bound_out(v.lower),
                "upper": _bound_out(v.upper),
                "kind": v.kind,
                "epigraph": [_affine_dict(e) for e in v.epigraph],
            }
            for v in problem.variables
        ],
        "constraints": [
            {"name": c.name, "lhs": _affine_dict(c.lhs), "relation": c.relation, "rhs": float(c.rhs)}
            for c in problem.constraints
        ],
        "objectives": objectives,
    }


def dump_problem(problem: MultiObjectiveProblem, path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")


def scalarized_to_dict(sp: ScalarizedProblem) -> dict:
    """Diagnostic dump of a scalarized instance, in the same affine vocabulary."""

    def row(a, name, rel, rhs):
        coefs = {n: float(c) for n, c in zip(sp.var_names, a) if c != 0.0}
        return {"name": name, "lhs": {"coefficients": coefs, "constant": 0.0}, "relation": rel, "rhs": float(rhs)}

    return {
        "kind": sp.kind,
        "variables": [
            {"name": n, "lower": _bound_out(lo), "upper": _bound_out(hi)}
            for n, lo, hi in zip(sp.var_names, sp.lower, sp.upper)
        ],
        "constraints": [row(a, f"ub{i}", "<=", b) for i, (a, b) in enumerate(zip(sp.A_ub, sp.b_ub))]
        + [row(a, f"eq{i}", "==", b) for i, (a, b) in enumerate(zip(sp.A_eq, sp.b_eq))],
        "cost": {
            "linear": {n: float(c) for n, c in zip(sp.var_names, sp.linear_cost)},
            "constant": float(sp.constant),
            "quad_terms": [
                {"scale": float(q.scale), "direction": [float(v) for v in np.asarray(q.direction)], "offset": float(q.offset)}
                for q in sp.quad_terms
            ],
        },
    }
