"""Multi-objective problem representation and weighted-sum scalarization.

A problem is a set of bounded continuous variables, linear constraints and a
list of objectives that are either affine or an affine part plus one convex
rank-one quadratic term ``scale * (a.x + c0)**2``. Scalarizing with a
preference vector produces a :class:`ScalarizedProblem` with dense arrays that
the embedded LP/QP solvers consume.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np

RELATIONS = ("<=", ">=", "==")
KINDS = ("design", "auxiliary")


@dataclass(frozen=True)
class AffineForm:
    """``sum(coefficients[v] * x[v]) + constant``."""

    coefficients: Mapping[str, float] = field(default_factory=dict)
    constant: float = 0.0

    def vector(self, names: Sequence[str]) -> np.ndarray:
        index = {n: i for i, n in enumerate(names)}
        out = np.zeros(len(names))
        for name, value in self.coefficients.items():
            out[index[name]] += value
        return out

    def scaled(self, factor: float, shift: float = 0.0) -> "AffineForm":
        return AffineForm(
            {k: factor * v for k, v in self.coefficients.items()},
            factor * self.constant + shift,
        )

    @property
    def variables(self) -> set[str]:
        return set(self.coefficients)


@dataclass(frozen=True)
class QuadraticForm:
    """``scale * direction(x)**2 + linear(x) + offset``.

    ``direction`` is itself affine, so the Hessian is ``2 * scale * a a^T``.
    """

    direction: AffineForm
    scale: float
    linear: AffineForm = field(default_factory=AffineForm)
    offset: float = 0.0

    def scaled(self, factor: float, shift: float = 0.0) -> "QuadraticForm":
        return QuadraticForm(
            self.direction,
            factor * self.scale,
            self.linear.scaled(factor),
            factor * self.offset + shift,
        )

    @property
    def variables(self) -> set[str]:
        return self.direction.variables | self.linear.variables


Form = Union[AffineForm, QuadraticForm]


@dataclass(frozen=True)
class VariableSpec:
    """A continuous variable with (possibly infinite) box bounds.

    Auxiliary epigraph variables may list the affine forms they bound from
    above; their tight value is ``max(lower, max(form(x) for form in epigraph))``.
    """

    name: str
    lower: float = -math.inf
    upper: float = math.inf
    kind: str = "design"
    epigraph: tuple[AffineForm, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"variable {self.name!r}: kind must be one of {KINDS}")
        if not self.lower <= self.upper:
            raise ValueError(f"variable {self.name!r}: lower {self.lower} > upper {self.upper}")


@dataclass(frozen=True)
class Objective:
    name: str
    form: Form
    sign_in_utility: int = 1

    def __post_init__(self):
        if self.sign_in_utility not in (1, -1):
            raise ValueError(f"objective {self.name!r}: sign_in_utility must be +1 or -1")
        if isinstance(self.form, QuadraticForm) and self.sign_in_utility * self.form.scale < 0:
            raise ValueError(
                f"objective {self.name!r}: quadratic term must be convex in the "
                "minimized utility (sign_in_utility * scale >= 0)"
            )

    @property
    def is_quadratic(self) -> bool:
        return isinstance(self.form, QuadraticForm)

    @property
    def sense(self) -> str:
        """Optimization sense of the objective on its own scale."""
        return "min" if self.sign_in_utility > 0 else "max"


@dataclass(frozen=True)
class LinearConstraint:
    lhs: AffineForm
    relation: str
    rhs: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"constraint {self.name!r}: relation must be one of {RELATIONS}")
        if not self.lhs.coefficients:
            raise ValueError(f"constraint {self.name!r}: empty left-hand side")


@dataclass(frozen=True)
class MultiObjectiveProblem:
    name: str
    variables: tuple[VariableSpec, ...]
    constraints: tuple[LinearConstraint, ...]
    objectives: tuple[Objective, ...]
    # objective name -> (f_min, f_max, approximate) when built by minmax_normalize
    normalization: Mapping[str, tuple[float, float, bool]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if len(self.objectives) < 2:
            raise ValueError("a multi-objective problem needs at least two objectives")
        if not any(v.kind == "design" for v in self.variables):
            raise ValueError("at least one design variable is required")
        known = set(names)
        for obj in self.objectives:
            missing = obj.form.variables - known
            if missing:
                raise ValueError(f"objective {obj.name!r} references unknown variables {sorted(missing)}")
        for i, con in enumerate(self.constraints):
            missing = con.lhs.variables - known
            if missing:
                raise ValueError(f"constraint {con.name or i!r} references unknown variables {sorted(missing)}")
        for var in self.variables:
            for form in var.epigraph:
                missing = form.variables - known
                if missing:
                    raise ValueError(f"epigraph of {var.name!r} references unknown variables {sorted(missing)}")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def design_mask(self) -> np.ndarray:
        return np.array([v.kind == "design" for v in self.variables])

    @property
    def design_indices(self) -> np.ndarray:
        return np.flatnonzero(self.design_mask)

    @property
    def design_names(self) -> list[str]:
        return [v.name for v in self.variables if v.kind == "design"]

    @property
    def objective_names(self) -> list[str]:
        return [o.name for o in self.objectives]

    @property
    def lower(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables], dtype=float)

    @property
    def signs(self) -> np.ndarray:
        return np.array([o.sign_in_utility for o in self.objectives], dtype=float)

    def design_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        idx = self.design_indices
        return self.lower[idx], self.upper[idx]


@dataclass(frozen=True)
class QuadTerm:
    """One convex rank-one term ``scale * (direction.x + offset)**2``."""

    scale: float
    direction: np.ndarray
    offset: float = 0.0


@dataclass(frozen=True)
class ScalarizedProblem:
    """``min linear_cost.x + constant + sum(quad terms)`` over a polytope.

    Constraints are kept as ``A_ub x <= b_ub``, ``A_eq x == b_eq`` plus box
    bounds ``lower <= x <= upper`` (infinite entries allowed).
    """

    linear_cost: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    quad_terms: tuple[QuadTerm, ...] = ()
    constant: float = 0.0
    var_names: tuple[str, ...] = ()

    def __post_init__(self):
        for t in self.quad_terms:
            if not t.scale >= 0:
                raise ValueError(f"quadratic scale {t.scale} is negative; the QP would be indefinite")

    @property
    def kind(self) -> str:
        return "convexQP" if self.quad_terms else "LP"

    @property
    def n(self) -> int:
        return len(self.linear_cost)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        total = float(self.linear_cost @ x) + self.constant
        for t in self.quad_terms:
            total += t.scale * float(t.direction @ x + t.offset) ** 2
        return total

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = self.linear_cost.astype(float).copy()
        for t in self.quad_terms:
            g += 2.0 * t.scale * float(t.direction @ x + t.offset) * t.direction
        return g

    def hessian(self) -> np.ndarray:
        H = np.zeros((self.n, self.n))
        for t in self.quad_terms:
            H += 2.0 * t.scale * np.outer(t.direction, t.direction)
        return H

    def with_cost(self, linear_cost, quad_terms=(), constant=0.0) -> "ScalarizedProblem":
        return replace(
            self,
            linear_cost=np.asarray(linear_cost, dtype=float),
            quad_terms=tuple(quad_terms),
            constant=constant,
        )

    def max_violation(self, x) -> float:
        """Largest violation of any constraint or bound at ``x`` (0 if feasible)."""
        x = np.asarray(x, dtype=float)
        v = 0.0
        if len(self.b_ub):
            v = max(v, float(np.max(self.A_ub @ x - self.b_ub, initial=0.0)))
        if len(self.b_eq):
            v = max(v, float(np.max(np.abs(self.A_eq @ x - self.b_eq), initial=0.0)))
        v = max(v, float(np.max(self.lower - x, initial=0.0)))
        v = max(v, float(np.max(x - self.upper, initial=0.0)))
        return v


# ---------------------------------------------------------------------------
# construction helpers


def _aff(constant: float = 0.0, **coefs: float) -> AffineForm:
    return AffineForm(dict(coefs), constant)


def _contact_patch() -> AffineForm:
    # x6 - 2 x5 - 3.414 x3 - 0.586 x4
    return _aff(x6=1.0, x5=-2.0, x3=-3.414, x4=-0.586)


def build_case_study(variant: str) -> MultiObjectiveProblem:
    """Return the vehicle design problem for ``"ackermann"`` or ``"pivot_skid"``.

    Both variants share variables, bounds and constraints; only the turning
    diameter objective differs (affine for Ackermann steering, convex
    quadratic for pivot/skid steering).
    """
    if variant not in ("ackermann", "pivot_skid"):
        raise ValueError(f"unknown case-study variant {variant!r}")

    variables = (
        VariableSpec("x1", 4.5, 23.0),
        VariableSpec("x2", 6.0, 20.0),
        VariableSpec("x3", 1.0, 5.0),
        VariableSpec("x4", 1.0, 3.0),
        VariableSpec("x5", 0.0, 15.0),
        VariableSpec("x6", 34.0, 132.0),
        VariableSpec("t1", 0.0, 23.0, "auxiliary", (_aff(x1=1.0, x5=-1.0),)),
        VariableSpec("t2", 0.0, 20.0, "auxiliary", (_aff(x2=1.0, x5=-1.0),)),
    )
    constraints = (
        LinearConstraint(_aff(x4=1.0, x3=-1.0), ">=", 0.0, "drive_gear_ge_road_wheel"),
        LinearConstraint(_aff(t1=1.0, x1=-1.0, x5=1.0), ">=", 0.0, "overhang_epigraph"),
        LinearConstraint(_aff(t2=1.0, x2=-1.0, x5=1.0), ">=", 0.0, "front_epigraph"),
        LinearConstraint(_contact_patch(), ">=", 0.0, "contact_patch_nonnegative"),
    )
    s = _contact_patch()
    f1 = Objective("f1", _aff(t1=1.0 / 23.0))
    f2 = Objective("f2", _aff(x6=1.0 / 141.0, t1=1.0 / 141.0, t2=1.0 / 141.0))
    f3 = Objective("f3", s.scaled(14.0 / 1792.0), sign_in_utility=-1)
    if variant == "ackermann":
        f4 = Objective("f4", _aff(-4.0 / 128.0, x6=1.0 / 128.0, x5=-2.0 / 128.0))
        name = "case1_ackermann"
    else:
        f4 = Objective(
            "f4",
            QuadraticForm(direction=s, scale=196.0 / 3211264.0, offset=-1936.0 / 3211264.0),
        )
        name = "case2_pivot_skid"
    return MultiObjectiveProblem(name, variables, constraints, (f1, f2, f3, f4))


def build_toy_discrete(a=(-15.0, -55.0), b=(1.0, 2.0), x_range=(0.0, 15.0)) -> MultiObjectiveProblem:
    """Two maximized linear objectives ``a_i + b_i x`` over an interval."""
    lo, hi = x_range
    objectives = tuple(
        Objective(f"f{i + 1}", _aff(float(a[i]), x=float(b[i])), sign_in_utility=-1) for i in range(2)
    )
    return MultiObjectiveProblem("toy_discrete", (VariableSpec("x", lo, hi),), (), objectives)


def build_toy_continuous(a=(1.0, 2.0), b=(1.0, 3.0)) -> MultiObjectiveProblem:
    """Two maximized concave quadratics ``a_i - b_i x - x**2`` on the real line."""
    objectives = tuple(
        Objective(
            f"f{i + 1}",
            QuadraticForm(
                direction=_aff(x=1.0),
                scale=-1.0,
                linear=_aff(x=-float(b[i])),
                offset=float(a[i]),
            ),
            sign_in_utility=-1,
        )
        for i in range(2)
    )
    return MultiObjectiveProblem("toy_continuous", (VariableSpec("x"),), (), objectives)


BUILTIN_PROBLEMS = {
    "case1_ackermann": lambda: build_case_study("ackermann"),
    "case2_pivot_skid": lambda: build_case_study("pivot_skid"),
    "toy_discrete": build_toy_discrete,
    "toy_continuous": build_toy_continuous,
}


def builtin_problem(name: str) -> MultiObjectiveProblem:
    try:
        return BUILTIN_PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin problem {name!r}; choose from {sorted(BUILTIN_PROBLEMS)}") from None


# ---------------------------------------------------------------------------
# evaluation


def _form_values(form: Form, names: Sequence[str], X: np.ndarray) -> np.ndarray:
    if isinstance(form, AffineForm):
        return X @ form.vector(names) + form.constant
    t = X @ form.direction.vector(names) + form.direction.constant
    return form.scale * t**2 + X @ form.linear.vector(names) + form.linear.constant + form.offset


def constraint_violation(problem: MultiObjectiveProblem, point) -> np.ndarray:
    """Per-point maximum violation of constraints and bounds (0 when feasible)."""
    X = np.atleast_2d(np.asarray(point, dtype=float))
    names = problem.names
    viol = np.maximum(problem.lower - X, 0.0).max(axis=1)
    viol = np.maximum(viol, np.maximum(X - problem.upper, 0.0).max(axis=1))
    for con in problem.constraints:
        r = X @ con.lhs.vector(names) + con.lhs.constant - con.rhs
        if con.relation == "<=":
            r = np.maximum(r, 0.0)
        elif con.relation == ">=":
            r = np.maximum(-r, 0.0)
        else:
            r = np.abs(r)
        viol = np.maximum(viol, r)
    return viol


def evaluate_objectives(problem: MultiObjectiveProblem, point, check: bool = True) -> np.ndarray:
    """Objective values at a full variable vector (or a stack of them).

    Values are on each objective's own scale; utility signs are not applied.
    Infeasible points are evaluated anyway, with a warning when ``check``.
    """
    arr = np.asarray(point, dtype=float)
    X = np.atleast_2d(arr)
    if X.ndim != 2 or X.shape[1] != problem.n_vars:
        raise ValueError(f"point has dimension {X.shape[-1]}, problem has {problem.n_vars} variables")
    if check:
        viol = constraint_violation(problem, X)
        if np.any(viol > 1e-8):
            warnings.warn(
                f"evaluating objectives at {int(np.sum(viol > 1e-8))} infeasible point(s) "
                f"(max violation {viol.max():.3g})",
                stacklevel=2,
            )
    names = problem.names
    out = np.column_stack([_form_values(o.form, names, X) for o in problem.objectives])
    return out[0] if arr.ndim == 1 else out


def complete_design(problem: MultiObjectiveProblem, design) -> np.ndarray:
    """Full variable vector(s) from design values, auxiliaries set epigraph-tight."""
    D = np.asarray(design, dtype=float)
    single = D.ndim == 1
    D = np.atleast_2d(D)
    idx = problem.design_indices
    if D.shape[1] != len(idx):
        raise ValueError(f"design has dimension {D.shape[1]}, problem has {len(idx)} design variables")
    X = np.zeros((D.shape[0], problem.n_vars))
    X[:, idx] = D
    names = problem.names
    for j, var in enumerate(problem.variables):
        if var.kind != "auxiliary":
            continue
        if not var.epigraph:
            raise ValueError(f"auxiliary variable {var.name!r} has no epigraph rule to re-derive it")
        val = np.full(D.shape[0], var.lower if math.isfinite(var.lower) else -np.inf)
        for form in var.epigraph:
            val = np.maximum(val, X @ form.vector(names) + form.constant)
        X[:, j] = val
    return X[0] if single else X


def design_objectives(problem: MultiObjectiveProblem, design) -> np.ndarray:
    """Objectives as a function of design variables only."""
    return evaluate_objectives(problem, complete_design(problem, design), check=False)


# ---------------------------------------------------------------------------
# scalarization


def compile_constraints(problem: MultiObjectiveProblem):
    """Dense ``(A_ub, b_ub, A_eq, b_eq)`` rows with every inequality as ``<=``."""
    names = problem.names
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for con in problem.constraints:
        a = con.lhs.vector(names)
        rhs = con.rhs - con.lhs.constant
        if con.relation == "<=":
            ub_rows.append(a)
            ub_rhs.append(rhs)
        elif con.relation == ">=":
            ub_rows.append(-a)
            ub_rhs.append(-rhs)
        else:
            eq_rows.append(a)
            eq_rhs.append(rhs)
    n = problem.n_vars
    return (
        np.array(ub_rows, dtype=float).reshape(-1, n),
        np.array(ub_rhs, dtype=float),
        np.array(eq_rows, dtype=float).reshape(-1, n),
        np.array(eq_rhs, dtype=float),
    )


def _empty_scalarized(problem: MultiObjectiveProblem) -> ScalarizedProblem:
    A_ub, b_ub, A_eq, b_eq = compile_constraints(problem)
    return ScalarizedProblem(
        linear_cost=np.zeros(problem.n_vars),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=b_eq,
        lower=problem.lower,
        upper=problem.upper,
        var_names=tuple(problem.names),
    )


def _accumulate(form: Form, weight: float, names, cost: np.ndarray, quads: list) -> float:
    """Add ``weight * form`` into ``cost``/``quads``; returns the constant part."""
    if isinstance(form, AffineForm):
        cost += weight * form.vector(names)
        return weight * form.constant
    cost += weight * form.linear.vector(names)
    scale = weight * form.scale
    if scale < 0:
        raise ValueError("weighted quadratic term is concave; scalarized problem would not be convex")
    if scale > 0:
        quads.append(QuadTerm(scale, form.direction.vector(names), form.direction.constant))
    return weight * (form.linear.constant + form.offset)


def scalarize(problem: MultiObjectiveProblem, beta, allow_nonpositive: bool = False) -> ScalarizedProblem:
    """Weighted-sum utility ``sum(beta_i * sign_i * f_i)`` as a minimization problem.

    Nonpositive weights are rejected unless ``allow_nonpositive`` (used for
    untruncated normal preferences in the analytic demos); a weight that would
    make a quadratic term concave is always rejected.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (problem.m,):
        raise ValueError(f"beta has shape {beta.shape}, expected ({problem.m},)")
    if not allow_nonpositive and np.any(beta <= 0):
        raise ValueError(f"preference weights must be positive, got {beta.tolist()}")
    base = _empty_scalarized(problem)
    names = problem.names
    cost = np.zeros(problem.n_vars)
    quads: list[QuadTerm] = []
    constant = 0.0
    for w, obj in zip(beta, problem.objectives):
        constant += _accumulate(obj.form, w * obj.sign_in_utility, names, cost, quads)
    return base.with_cost(cost, quads, constant)


# ---------------------------------------------------------------------------
# normalization


class UnboundedObjectiveError(ValueError):
    pass


def _objective_extreme(problem, obj: Objective, maximize: bool, max_bases: int, stream_seed: int):
    from .solvers import solve
    from .solvers.vertices import count_candidate_bases, enumerate_vertices

    base = _empty_scalarized(problem)
    names = problem.names
    if not obj.is_quadratic or (obj.form.scale >= 0) != maximize:
        # convex minimization direction: solve exactly
        sign = -1.0 if maximize else 1.0
        cost = np.zeros(problem.n_vars)
        quads: list[QuadTerm] = []
        if obj.is_quadratic:
            # -q(x) is convex when scale < 0 and we maximize
            form = obj.form
            cost += sign * form.linear.vector(names)
            quads.append(QuadTerm(abs(form.scale), form.direction.vector(names), form.direction.constant))
            const = sign * (form.linear.constant + form.offset)
        else:
            const = _accumulate(obj.form, sign, names, cost, quads)
        sol = solve(base.with_cost(cost, quads, const))
        if sol.status == "unbounded":
            raise UnboundedObjectiveError(f"objective {obj.name!r} is unbounded over the feasible region")
        if sol.status != "optimal":
            raise RuntimeError(f"normalizing objective {obj.name!r}: solver status {sol.status}")
        return sign * sol.objective_value, False
    # maximizing a convex function (or minimizing a concave one): attained at a vertex
    if not (np.all(np.isfinite(base.lower)) and np.all(np.isfinite(base.upper))):
        raise UnboundedObjectiveError(f"objective {obj.name!r}: extreme of non-convex direction needs finite bounds")
    vals_fn = lambda V: _form_values(obj.form, names, V)  # noqa: E731
    pick = np.max if maximize else np.min
    if count_candidate_bases(base) <= max_bases:
        V = enumerate_vertices(base)
        return float(pick(vals_fn(V))), False
    from .pareto import lhs_sample
    from .preferences import SeededStream

    P = lhs_sample(np.column_stack([base.lower, base.upper]), 20000, SeededStream(stream_seed, 0))
    feasible = constraint_violation(problem, P) <= 1e-9
    if not np.any(feasible):
        raise RuntimeError(f"normalizing objective {obj.name!r}: no feasible sampled point")
    return float(pick(vals_fn(P[feasible]))), True


def minmax_normalize(problem_raw: MultiObjectiveProblem, max_bases: int = 2**20, seed: int = 0) -> MultiObjectiveProblem:
    """Rescale each objective to ``(f - f_min) / (f_max - f_min)`` over the feasible region.

    Affine extremes come from LPs. A convex quadratic's minimum comes from the
    QP and its maximum from vertex enumeration, or from a Latin hypercube
    estimate (flagged approximate) when there are more than ``max_bases``
    candidate bases.
    """
    new_objs = []
    norm = {}
    for obj in problem_raw.objectives:
        fmin, approx_lo = _objective_extreme(problem_raw, obj, False, max_bases, seed)
        fmax, approx_hi = _objective_extreme(problem_raw, obj, True, max_bases, seed)
        span = fmax - fmin
        if not span > 0:
            raise ValueError(f"objective {obj.name!r} is constant over the feasible region")
        new_objs.append(replace(obj, form=obj.form.scaled(1.0 / span, -fmin / span)))
        norm[obj.name] = (fmin, fmax, approx_lo or approx_hi)
    return replace(problem_raw, objectives=tuple(new_objs), normalization=norm)
