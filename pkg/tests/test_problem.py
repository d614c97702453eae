import json
import math

import numpy as np
import pytest

from prefprop.problem import (
    AffineForm,
    LinearConstraint,
    MultiObjectiveProblem,
    Objective,
    QuadraticForm,
    VariableSpec,
    build_case_study,
    complete_design,
    constraint_violation,
    evaluate_objectives,
    minmax_normalize,
    scalarize,
)
from prefprop.problem_io import ProblemFileError, problem_from_dict, problem_to_dict, scalarized_to_dict
from prefprop.solvers import solve


def full_point(problem, design, t=(0.0, 0.0)):
    return np.array([*design, *t], dtype=float)


def test_case_study_shapes(case1, case2):
    assert case1.n_vars == 8 and case2.n_vars == 8
    assert len(case1.constraints) == 4
    assert case1.design_names == ["x1", "x2", "x3", "x4", "x5", "x6"]
    assert not any(o.is_quadratic for o in case1.objectives)
    f4 = case2.objectives[3].form
    assert isinstance(f4, QuadraticForm)
    assert f4.scale == 196 / 3211264
    assert f4.offset == -1936 / 3211264
    assert f4.direction.coefficients == {"x6": 1.0, "x5": -2.0, "x3": -3.414, "x4": -0.586}
    assert case1.constraints == case2.constraints
    assert case1.variables == case2.variables
    assert [o.sign_in_utility for o in case1.objectives] == [1, 1, -1, 1]


def test_evaluate_hand_values(case1, case2):
    f = evaluate_objectives(case1, full_point(case1, (4.5, 6, 1, 1, 15, 34)))
    assert f == pytest.approx([0.0, 34 / 141, 0.0, 0.0], abs=1e-12)
    f = evaluate_objectives(case1, full_point(case1, (4.5, 6, 1, 1, 6, 34)))
    assert f[2] == pytest.approx(0.140625, abs=1e-12)
    assert f[3] == pytest.approx(0.140625, abs=1e-12)
    # contact patch s = 0 leaves only the offset
    f = evaluate_objectives(case2, full_point(case2, (4.5, 6, 1, 1, 15, 34)))
    assert f[3] == pytest.approx(-1936 / 3211264, abs=1e-15)


def test_evaluate_warns_when_infeasible(case1):
    with pytest.warns(UserWarning, match="infeasible"):
        evaluate_objectives(case1, full_point(case1, (4.5, 6, 3, 1, 15, 34)))
    with pytest.raises(ValueError, match="dimension"):
        evaluate_objectives(case1, np.zeros(6))


def test_complete_design_epigraph_tight(case1):
    X = complete_design(case1, [[10, 8, 1, 1, 3, 60], [4.5, 6, 1, 1, 15, 34]])
    assert X[0, 6:] == pytest.approx([7, 5])
    assert X[1, 6:] == pytest.approx([0, 0])
    assert np.all(constraint_violation(case1, X) == 0)


def test_scalarize_kind(case1, case2):
    assert scalarize(case1, [1, 1, 1, 1]).kind == "LP"
    sp = scalarize(case2, [1, 1, 1, 1])
    assert sp.kind == "convexQP" and len(sp.quad_terms) == 1
    eps = 1e-3
    assert scalarize(case2, [1, 1, 1, eps]).quad_terms[0].scale == pytest.approx(eps * 196 / 3211264)


def test_scalarize_rejects_nonpositive(case1):
    with pytest.raises(ValueError, match="positive"):
        scalarize(case1, [1, 0, 1, 1])
    with pytest.raises(ValueError, match="shape"):
        scalarize(case1, [1, 1, 1])


def test_scalarize_linear_in_beta(case2):
    rng = np.random.default_rng(0)
    b1, b2 = rng.uniform(0.1, 2, 4), rng.uniform(0.1, 2, 4)
    a, b = 0.7, 2.3
    s1, s2, s12 = scalarize(case2, b1), scalarize(case2, b2), scalarize(case2, a * b1 + b * b2)
    assert s12.linear_cost == pytest.approx(a * s1.linear_cost + b * s2.linear_cost, abs=1e-14)
    assert s12.quad_terms[0].scale == pytest.approx(a * s1.quad_terms[0].scale + b * s2.quad_terms[0].scale)


@pytest.mark.parametrize("name", ["case1_ackermann", "case2_pivot_skid"])
def test_positive_rescaling_keeps_objectives(name):
    from prefprop.problem import builtin_problem

    p = builtin_problem(name)
    rng = np.random.default_rng(1)
    for _ in range(10):
        beta = rng.uniform(0.2, 2, 4)
        f1 = evaluate_objectives(p, solve(scalarize(p, beta)).point)
        f2 = evaluate_objectives(p, solve(scalarize(p, 13.0 * beta)).point)
        assert f1 == pytest.approx(f2, abs=1e-8)


def _raw_case_problem():
    """Case study with unnormalized objectives (t1, and contact patch times 14)."""
    base = build_case_study("ackermann")
    s = base.objectives[2].form.scaled(1792 / 14)
    objs = (
        Objective("overhang", AffineForm({"t1": 1.0})),
        Objective("patch", s.scaled(14.0), sign_in_utility=-1),
    )
    return MultiObjectiveProblem("raw", base.variables, base.constraints, objs)


def test_minmax_normalize_reproduces_divisors():
    norm = minmax_normalize(_raw_case_problem())
    assert norm.normalization["overhang"][:2] == pytest.approx((0.0, 23.0), abs=1e-9)
    # maximize 14 s: x6=132, x5=0, x3=x4=1 gives 14 * 128 = 1792
    assert norm.normalization["patch"][:2] == pytest.approx((0.0, 1792.0), abs=1e-9)
    assert norm.objectives[0].form.coefficients["t1"] == pytest.approx(1 / 23)


def test_minmax_identity_when_already_unit():
    vars_ = (VariableSpec("x", 0, 1), VariableSpec("y", 0, 1))
    objs = (Objective("a", AffineForm({"x": 1.0})), Objective("b", AffineForm({"y": 1.0})))
    p = MultiObjectiveProblem("unit", vars_, (), objs)
    n = minmax_normalize(p)
    assert n.objectives[0].form.coefficients == pytest.approx({"x": 1.0})
    assert n.objectives[0].form.constant == pytest.approx(0.0)


def test_minmax_quadratic_uses_vertices(case2):
    p = minmax_normalize(case2)
    lo, hi, approx = p.normalization["f4"]
    assert not approx
    assert lo == pytest.approx(-1936 / 3211264, abs=1e-12)
    assert hi == pytest.approx((196 * 128**2 - 1936) / 3211264, rel=1e-12)


def test_minmax_unbounded_names_objective():
    vars_ = (VariableSpec("x", 0, math.inf), VariableSpec("y", 0, 1))
    objs = (Objective("grow", AffineForm({"x": 1.0})), Objective("b", AffineForm({"y": 1.0})))
    with pytest.raises(ValueError, match="grow"):
        minmax_normalize(MultiObjectiveProblem("u", vars_, (), objs))


def test_validation_errors():
    v = (VariableSpec("x", 0, 1),)
    with pytest.raises(ValueError, match="at least two"):
        MultiObjectiveProblem("p", v, (), (Objective("a", AffineForm({"x": 1.0})),))
    with pytest.raises(ValueError, match="unknown variables"):
        MultiObjectiveProblem("p", v, (), (Objective("a", AffineForm({"z": 1.0})), Objective("b", AffineForm({"x": 1.0}))))
    with pytest.raises(ValueError, match="lower"):
        VariableSpec("x", 2, 1)
    with pytest.raises(ValueError, match="empty"):
        LinearConstraint(AffineForm({}), "<=", 0)
    with pytest.raises(ValueError, match="convex"):
        Objective("q", QuadraticForm(AffineForm({"x": 1.0}), -1.0), sign_in_utility=1)


@pytest.mark.parametrize("name", ["case1_ackermann", "case2_pivot_skid", "toy_discrete", "toy_continuous"])
def test_problem_file_round_trip(name):
    from prefprop.problem import builtin_problem

    p = builtin_problem(name)
    q = problem_from_dict(json.loads(json.dumps(problem_to_dict(p))))
    rng = np.random.default_rng(2)
    lo = np.where(np.isfinite(p.lower), p.lower, -10)
    hi = np.where(np.isfinite(p.upper), p.upper, 10)
    X = rng.uniform(lo, hi, size=(100, p.n_vars))
    assert evaluate_objectives(q, X, check=False) == pytest.approx(evaluate_objectives(p, X, check=False), abs=1e-12)
    assert q.variables == p.variables and q.constraints == p.constraints


def test_problem_file_error_paths(case1):
    doc = problem_to_dict(case1)
    doc["constraints"][1]["relation"] = "<"
    with pytest.raises(ProblemFileError, match=r"\$\.constraints\[1\]\.relation"):
        problem_from_dict(doc)
    doc = problem_to_dict(case1)
    doc["objectives"][0]["quadratic"] = {"scale": 1.0, "direction": {"coefficients": {}}}
    with pytest.raises(ProblemFileError, match=r"objectives\[0\]"):
        problem_from_dict(doc)
    doc = problem_to_dict(case1)
    doc["objectives"][0]["affine"]["coefficients"]["nope"] = 1.0
    with pytest.raises(ProblemFileError, match="nope"):
        problem_from_dict(doc)


def test_null_bounds_mean_unbounded():
    p = problem_from_dict(
        {
            "variables": [{"name": "x", "lower": None, "upper": None}],
            "constraints": [],
            "objectives": [
                {"name": "a", "sense_in_utility": -1, "quadratic": {"scale": -1, "direction": {"coefficients": {"x": 1}}}},
                {"name": "b", "affine": {"coefficients": {"x": 1}}},
            ],
        }
    )
    assert p.lower[0] == -math.inf and p.upper[0] == math.inf


def test_scalarized_dump(case2):
    d = scalarized_to_dict(scalarize(case2, [1, 1, 1, 1]))
    assert d["kind"] == "convexQP"
    assert len(d["constraints"]) == 4
    json.dumps(d)
