import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prefprop.frechet import frechet_summary, frechet_variance, normalize_designs, scenario_sweep
from prefprop.preferences import SeededStream, isotropic_tmvn

UNIT = (np.zeros(2), np.ones(2))


def test_point_mass_zero():
    s = frechet_summary(np.tile([0.3, 0.7], (25, 1)), UNIT, n_boot=100)
    assert s.variance == 0.0 and s.bootstrap_ci == (0.0, 0.0)


def test_two_points():
    p, q = np.array([0.0, 0.2]), np.array([1.0, 0.9])
    s = frechet_summary(np.array([p, q]), UNIT, n_boot=100)
    assert s.variance == pytest.approx(np.sum((p - q) ** 2) / 4, abs=1e-15)
    assert s.mean == pytest.approx((p + q) / 2)


def test_normalization_by_declared_bounds(case1):
    lo, hi = case1.design_bounds()
    Z = normalize_designs([[4.5, 6, 1, 1, 0, 34], [23, 20, 5, 3, 15, 132]], lo, hi)
    assert np.allclose(Z, [[0] * 6, [1] * 6])
    with pytest.raises(ValueError):
        normalize_designs([[1.0]], [0.0], [0.0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 40), st.integers(1, 5)), elements=st.floats(0, 1)))
def test_two_formula_identity(Z):
    mean, var = frechet_variance(Z)
    alt = np.mean(np.sum(Z**2, axis=1)) - np.sum(mean**2)
    assert var >= 0
    assert abs(var - alt) <= 1e-10
    assert (var == 0) == bool(np.all(Z == Z[0]))


def test_ci_brackets_estimate(case1, case1_run):
    s = frechet_summary(case1_run, case1.design_bounds(), "b", SeededStream(1))
    lo, hi = s.bootstrap_ci
    assert lo < s.variance < hi
    assert s.n == 1000


def test_sweep_determinism_and_order(case1):
    d = isotropic_tmvn([1.0] * 4, 0.5)
    res = scenario_sweep(case1, [("a", d), ("b", d)], 200, 5)
    assert [s.scenario_label for s, _ in res] == ["a", "b"]
    # scenarios draw from distinct streams
    assert not np.array_equal(res[0][1].designs, res[1][1].designs)
    again = scenario_sweep(case1, [("a", d), ("b", d)], 200, 5)
    assert [s.variance for s, _ in res] == [s.variance for s, _ in again]
    with pytest.raises(ValueError):
        scenario_sweep(case1, [], 10, 0)
