import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prefprop.pareto import compare_overlay, dominated_beyond, lhs_sample, non_dominated, pareto_baseline, pareto_filter
from prefprop.preferences import SeededStream
from prefprop.problem import complete_design, constraint_violation, design_objectives


def brute_force_front(F):
    keep = []
    for i in range(len(F)):
        dominated = any(np.all(F[j] <= F[i]) and np.any(F[j] < F[i]) for j in range(len(F)) if j != i)
        if not dominated:
            keep.append(i)
    return keep


def test_lhs_strata():
    x = lhs_sample([[0, 4]], 4, SeededStream(0))[:, 0]
    assert sorted(np.floor(x).astype(int)) == [0, 1, 2, 3]
    B = np.array([[4.5, 23], [6, 20], [1, 5], [1, 3], [0, 15], [34, 132]])
    X = lhs_sample(B, 1000, SeededStream(1))
    for j, (lo, hi) in enumerate(B):
        idx = np.floor((X[:, j] - lo) / (hi - lo) * 1000).astype(int)
        assert np.array_equal(np.sort(idx), np.arange(1000))


def test_lhs_marginal_mean():
    n = 10_000
    X = lhs_sample([[0, 1], [-2, 6]], n, SeededStream(2))
    for j, (lo, hi) in enumerate([(0, 1), (-2, 6)]):
        sd = (hi - lo) / np.sqrt(12 * n)
        assert abs(X[:, j].mean() - (lo + hi) / 2) < 3 * sd


def test_filter_small_cases():
    assert non_dominated(np.array([[1, 1], [2, 2]]), ["min", "min"]).tolist() == [0]
    assert non_dominated(np.array([[1, 2], [2, 1]]), ["min", "min"]).tolist() == [0, 1]
    # a maximized objective flips the comparison
    assert non_dominated(np.array([[1, 1], [2, 2]]), ["min", "max"]).tolist() == [0, 1]


def test_filter_matches_brute_force():
    F = np.random.default_rng(0).uniform(size=(1000, 4))
    assert non_dominated(F, ["min"] * 4).tolist() == brute_force_front(F)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 60))
def test_filter_idempotent_and_stable(seed, n):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 4, size=(n, 3)).astype(float)
    ps = pareto_filter(F, F, ["min", "max", "min"])
    again = pareto_filter(ps.designs, ps.objectives, ["min", "max", "min"])
    assert np.array_equal(again.objectives, ps.objectives)
    assert np.all(np.diff(ps.indices) > 0)


def test_baseline_feasible_and_counts(case1):
    ps = pareto_baseline(case1, 3000, SeededStream(3))
    assert ps.n_sampled == 3000 and 0 < ps.n_feasible < 3000
    assert np.all(constraint_violation(case1, complete_design(case1, ps.designs)) <= 1e-8)
    assert ps.objectives == pytest.approx(design_objectives(case1, ps.designs))


def test_preference_points_not_dominated(case1, case1_run):
    lo, hi = case1.design_bounds()
    D = lhs_sample(np.column_stack([lo, hi]), 20_000, SeededStream(4))
    D = D[constraint_violation(case1, complete_design(case1, D)) <= 1e-8]
    senses = [o.sense for o in case1.objectives]
    assert not dominated_beyond(case1_run.objective_values, design_objectives(case1, D), senses).any()


def test_overlay(case1, case1_run):
    ps = pareto_baseline(case1, 2000, SeededStream(5))
    rows = compare_overlay(ps, case1_run, case1)
    pref = [r for r in rows if r.source == "preference"]
    assert len(pref) == 5
    assert sum(r.probability for r in pref) == pytest.approx(1.0)
    only_grey = compare_overlay(ps, None, case1)
    assert {r.source for r in only_grey} == {"pareto"}
