import math

import mpmath
import numpy as np
import pytest

from prefprop.demos import (
    CONTINUOUS_DEFAULTS,
    ContinuousToySpec,
    DiscreteToySpec,
    discrete_distribution,
    switch_probability,
    toy_distribution,
    toy_xstar,
)
from prefprop.preferences import Dirichlet, MVN, SeededStream, sample
from prefprop.problem import build_toy_continuous, build_toy_discrete, scalarize
from prefprop.propagate import propagate
from prefprop.solvers import solve

I2 = ((1.0, 0.0), (0.0, 1.0))


def test_switch_probability_values():
    assert switch_probability(DiscreteToySpec((0.0, 0.0), I2)) == 0.5
    ref = float(mpmath.ncdf(3 / mpmath.sqrt(5)))
    assert switch_probability(DiscreteToySpec((1.0, 1.0), I2)) == pytest.approx(ref, abs=1e-14)
    assert ref == pytest.approx(0.910144, abs=1e-6)


def test_switch_probability_degenerate():
    zero = ((0.0, 0.0), (0.0, 0.0))
    assert switch_probability(DiscreteToySpec((1.0, 1.0), zero)) == 1.0
    assert switch_probability(DiscreteToySpec((-1.0, 0.0), zero)) == 0.0
    with pytest.raises(ValueError, match="undefined"):
        switch_probability(DiscreteToySpec((2.0, -1.0), zero))


def test_switch_probability_invariances():
    base = DiscreteToySpec((0.4, -0.2), ((1.0, 0.3), (0.3, 0.8)))
    p = switch_probability(base)
    scaled_b = DiscreteToySpec(base.theta, base.sigma, b=(3.0, 6.0))
    assert switch_probability(scaled_b) == pytest.approx(p, abs=1e-14)
    k = 2.5
    scaled = DiscreteToySpec(tuple(k * t for t in base.theta), tuple(tuple(k * k * v for v in r) for r in base.sigma))
    assert switch_probability(scaled) == pytest.approx(p, abs=1e-14)


def test_toy_xstar_values():
    assert toy_xstar([0.5, 0.5]) == pytest.approx(-1.0)
    assert toy_xstar([1.0, 0.0]) == pytest.approx(-0.5)
    assert toy_xstar([0.0, 1.0]) == pytest.approx(-1.5)
    assert toy_xstar([7.0, 7.0]) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        toy_xstar([1.0, -1.0])


def test_toy_distribution_shape_and_range():
    td = toy_distribution(ContinuousToySpec((1.0, 1.0)), 5000, SeededStream(0))
    assert td.xstar.min() >= -1.5 and td.xstar.max() <= -0.5
    assert td.curve_f.shape == (len(td.curve_x), 2)
    # curve coordinates are the two objectives
    x = td.curve_x[17]
    assert td.curve_f[17] == pytest.approx([1 - x - x * x, 2 - 3 * x - x * x])
    with pytest.raises(ValueError):
        toy_distribution(ContinuousToySpec(), 0, SeededStream(0))
    with pytest.raises(ValueError):
        ContinuousToySpec((1.0, 0.0))


def test_concentration_and_shift():
    n = 100_000
    var = {}
    mean = {}
    for k, spec in enumerate(CONTINUOUS_DEFAULTS):
        xs = toy_distribution(spec, n, SeededStream(1, k)).xstar
        var[spec.alpha] = xs.var()
        mean[spec.alpha] = xs.mean()
    assert var[(2.0, 2.0)] < var[(1.0, 1.0)] < var[(0.5, 0.5)]
    assert mean[(1.0, 0.5)] > mean[(0.5, 1.0)]


def test_continuous_toy_pipeline_matches_closed_form():
    p = build_toy_continuous()
    dd = propagate(p, Dirichlet((1.0, 1.0)), 300, 4)
    ref = toy_xstar(dd.betas)
    assert np.max(np.abs(dd.designs[:, 0] - ref)) <= 1e-8


@pytest.mark.parametrize("theta,sigma", [((0.5, -0.1), I2), ((-0.2, 0.1), ((0.5, 0.2), (0.2, 0.3)))])
def test_discrete_toy_pipeline_matches_closed_form(theta, sigma):
    n = 5000
    spec = DiscreteToySpec(theta, sigma)
    dd = propagate(build_toy_discrete(), MVN(theta, sigma), n, 2)
    emp = np.mean(dd.designs[:, 0] == 15)
    p = switch_probability(spec)
    assert abs(emp - p) <= 3 * math.sqrt(p * (1 - p) / n)
    # the shortcut sampler agrees with the solver draw for draw
    xs, _ = discrete_distribution(spec, n, SeededStream(2, 0))
    assert np.array_equal(xs, dd.designs[:, 0])


def test_solver_reaches_each_endpoint():
    p = build_toy_discrete()
    assert solve(scalarize(p, [1.0, 1.0], allow_nonpositive=True)).point[0] == 15
    assert solve(scalarize(p, [-1.0, -1.0], allow_nonpositive=True)).point[0] == 0
    betas = sample(MVN((1, 1), I2), 10, SeededStream(0))
    assert betas.shape == (10, 2)
