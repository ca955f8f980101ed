import numpy as np
import pytest

from conftest import brute_force_wasserstein
from slicediv.fulldim import (
    UnsupportedInputError,
    median_heuristic_kernel,
    median_heuristic_width,
    mmd_nd,
    projected_spread_bound,
    projected_spread_trial,
    sinkhorn_divergence_nd,
    sinkhorn_nd,
    wasserstein_exact,
)
from slicediv.measures import EmpiricalMeasure, SortedSupport1D, make_uniform_empirical
from slicediv.onedim import Kernel1D, mmd_1d, sinkhorn_cost_1d
from slicediv.sinkhorn import SinkhornConfig


def U(points):
    return make_uniform_empirical(points)


def test_exact_w_values(rng):
    X = rng.normal(size=(6, 3))
    res = wasserstein_exact(U(X), U(X), 2)
    assert res.cost == 0.0
    np.testing.assert_array_equal(res.permutation, np.arange(6))
    assert wasserstein_exact(U([[0, 0]]), U([[3, 4]]), 2).cost == pytest.approx(5.0)


def test_exact_w_brute_force(rng):
    for p in (1.0, 2.0, 3.0):
        X, Y = rng.normal(size=(5, 2)), rng.normal(size=(5, 2))
        assert wasserstein_exact(U(X), U(Y), p).cost == pytest.approx(brute_force_wasserstein(X, Y, p), rel=1e-9)


def test_exact_w_unsupported():
    with pytest.raises(UnsupportedInputError):
        wasserstein_exact(U([[0.0], [1.0]]), U([[0.0]]), 2)
    with pytest.raises(UnsupportedInputError):
        wasserstein_exact(EmpiricalMeasure([[0.0], [1.0]], [0.3, 0.7]), U([[0.0], [1.0]]), 2)


def test_sinkhorn_nd_matches_1d(rng):
    x, y = rng.normal(size=7), rng.normal(size=5)
    cfg = SinkhornConfig(0.3)
    nd = sinkhorn_nd(U(x[:, None]), U(y[:, None]), cfg)
    one = sinkhorn_cost_1d(SortedSupport1D.from_samples(x), SortedSupport1D.from_samples(y), cfg)
    assert nd.regularized_objective == pytest.approx(one.regularized_objective, rel=1e-12)
    assert sinkhorn_nd(U([[1.0, 2.0]]), U([[1.0, 2.0]]), cfg).transport_cost == 0.0


def test_sinkhorn_nd_small_eps(rng):
    X, Y = rng.uniform(-0.7, 0.7, size=(8, 2)), rng.uniform(-0.7, 0.7, size=(8, 2))
    res = sinkhorn_nd(U(X), U(Y), SinkhornConfig(1e-3, max_iterations=100_000))
    assert abs(res.transport_cost - wasserstein_exact(U(X), U(Y), 2).cost ** 2) <= 1e-2


def test_sinkhorn_divergence_nd(rng):
    X, Y = rng.normal(size=(9, 3)), rng.normal(size=(7, 3))
    cfg = SinkhornConfig(0.5)
    assert sinkhorn_divergence_nd(U(X), U(X), cfg) == 0.0
    assert sinkhorn_divergence_nd(U(X), U(Y), cfg) == pytest.approx(sinkhorn_divergence_nd(U(Y), U(X), cfg), rel=1e-6)
    assert sinkhorn_divergence_nd(U(X), U(Y + 3.0), cfg) > sinkhorn_divergence_nd(U(X), U(Y), cfg)


def test_mmd_nd(rng):
    X, Y = rng.normal(size=(8, 1)), rng.normal(size=(6, 1))
    k = Kernel1D("rbf", 0.7)
    assert mmd_nd(U(X), U(X), k) == 0.0
    one = mmd_1d(SortedSupport1D.from_samples(X[:, 0]), SortedSupport1D.from_samples(Y[:, 0]), k)
    assert mmd_nd(U(X), U(Y), k) == pytest.approx(one, rel=1e-12)


def test_median_heuristic():
    assert median_heuristic_width([[0.0], [2.0]]) == 2.0
    assert median_heuristic_kernel(U([[0.0]]), U([[2.0]])).bandwidth == 4.0
    with pytest.raises(ValueError):
        median_heuristic_width(np.ones((5, 2)))


def test_projected_spread_bound():
    assert projected_spread_bound(1.0, 1, 1.0, 3) == pytest.approx(2 / 3 * np.log(np.sqrt(2 * np.pi)))
    with pytest.raises(ValueError):
        projected_spread_bound(1.0, 10, 0.0, 2)
    with pytest.raises(ValueError):
        projected_spread_bound(1.0, 10, 1.5, 2)


def test_projected_spread_trial(rng):
    assert projected_spread_trial(rng.normal(size=(1, 4)), 50, 0.05, seed=0) == 0.0
    # d = 1: the spread is exactly R^2 and the bound is 2 R^2 log(sqrt(2 pi) n^2 / delta) > R^2
    assert projected_spread_trial([[0.0], [1.0], [3.0]], 10, 0.5, seed=0) == 0.0
    X = rng.normal(size=(100, 50))
    assert projected_spread_trial(X, 2000, 0.05, seed=1) <= 0.05
    assert projected_spread_trial(X, 200, 0.05, seed=1, others=rng.normal(size=(30, 50))) <= 0.05
