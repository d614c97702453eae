import numpy as np
import pytest
from scipy import stats

from prefprop.preferences import (
    MVN,
    Dirichlet,
    Fixed,
    LowAcceptanceError,
    SeededStream,
    TruncatedMVN,
    dist_from_spec,
    dist_to_spec,
    isotropic_tmvn,
    sample,
    truncation_acceptance,
)


def test_rows_are_addressable():
    d = isotropic_tmvn([1, 1, 1, 1], 0.5)
    s = SeededStream(7, 3)
    full = sample(d, 50, s)
    assert np.array_equal(sample(d, 20, s, start=30), full[30:])
    assert np.array_equal(sample(d, 50, s), full)
    assert not np.array_equal(sample(d, 50, SeededStream(7, 4)), full)
    assert not np.array_equal(sample(d, 50, SeededStream(8, 3)), full)


def test_tmvn_support_and_marginal_mean():
    d = isotropic_tmvn([1.0, 0.5], 0.5, eps=1e-6)
    X = sample(d, 20_000, SeededStream(1))
    assert X.min() >= 1e-6
    sd = np.sqrt(0.5)
    for j, mu in enumerate([1.0, 0.5]):
        a = (1e-6 - mu) / sd
        ref = stats.truncnorm(a, np.inf, loc=mu, scale=sd)
        assert abs(X[:, j].mean() - ref.mean()) < 4 * ref.std() / np.sqrt(len(X))


def test_tmvn_correlated_matches_conditioned_normal():
    S = [[1.0, 0.6], [0.6, 1.0]]
    d = TruncatedMVN([0.5, 0.5], S, 1e-3)
    X = sample(d, 20_000, SeededStream(2))
    # oracle: plain normal draws conditioned by brute force
    Y = np.random.default_rng(0).multivariate_normal([0.5, 0.5], S, size=400_000)
    Y = Y[np.all(Y >= 1e-3, axis=1)]
    assert X.mean(axis=0) == pytest.approx(Y.mean(axis=0), abs=0.03)
    assert np.corrcoef(X.T)[0, 1] == pytest.approx(np.corrcoef(Y.T)[0, 1], abs=0.03)


def test_low_acceptance_raises():
    with pytest.raises(LowAcceptanceError, match="acceptance"):
        sample(isotropic_tmvn([-5, -5, -5], 0.5), 10, SeededStream(0))


def test_truncation_acceptance():
    d = isotropic_tmvn([0.0, 0.0], 1.0, eps=1e-12)
    assert truncation_acceptance(d) == pytest.approx(0.25, abs=1e-9)
    d = TruncatedMVN([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], 1e-12)
    # orthant probability 1/4 + arcsin(rho)/(2 pi)
    assert truncation_acceptance(d) == pytest.approx(0.25 + np.arcsin(0.5) / (2 * np.pi), abs=1e-3)


def test_dirichlet_moments():
    a = np.array([2.0, 0.5, 1.5])
    X = sample(Dirichlet(a), 40_000, SeededStream(3))
    assert np.allclose(X.sum(axis=1), 1.0)
    a0 = a.sum()
    mean = a / a0
    var = mean * (1 - mean) / (a0 + 1)
    assert np.all(np.abs(X.mean(axis=0) - mean) < 4 * np.sqrt(var / len(X)))
    assert X.var(axis=0) == pytest.approx(var, rel=0.05)


def test_mvn_moments():
    S = np.array([[1.0, -0.3], [-0.3, 0.5]])
    X = sample(MVN([0.2, -0.1], S), 40_000, SeededStream(4))
    assert np.cov(X.T) == pytest.approx(S, abs=0.03)


def test_fixed():
    X = sample(Fixed([1, 2, 3]), 5, SeededStream(0))
    assert np.all(X == [1, 2, 3])


def test_invalid_inputs():
    with pytest.raises(ValueError, match="semidefinite"):
        MVN([0, 0], [[1, 2], [2, 1]])
    with pytest.raises(ValueError, match="symmetric"):
        MVN([0, 0], [[1, 0.1], [0, 1]])
    with pytest.raises(ValueError):
        Dirichlet([1, 0])
    with pytest.raises(ValueError):
        Fixed([1, -1])
    with pytest.raises(ValueError):
        sample(Fixed([1]), 0, SeededStream(0))


def test_singular_psd_allowed():
    X = sample(MVN([0, 0], [[1, 1], [1, 1]]), 100, SeededStream(0))
    assert np.allclose(X[:, 0], X[:, 1])


@pytest.mark.parametrize(
    "spec",
    [
        {"type": "tmvn", "mu": [1, 1], "sigma": 0.5, "eps": 1e-6},
        {"type": "mvn", "mu": [0, 1], "sigma": [[1, 0], [0, 2]]},
        {"type": "dirichlet", "alpha": [0.5, 1]},
        {"type": "fixed", "beta": [1, 2]},
    ],
)
def test_spec_round_trip(spec):
    d = dist_from_spec(spec)
    assert dist_from_spec(dist_to_spec(d)) == d


def test_spec_errors():
    with pytest.raises(ValueError, match="type"):
        dist_from_spec({"mu": [1]})
    with pytest.raises(ValueError, match="missing field 'alpha'"):
        dist_from_spec({"type": "dirichlet"})
    with pytest.raises(ValueError, match="unknown"):
        dist_from_spec({"type": "cauchy"})
