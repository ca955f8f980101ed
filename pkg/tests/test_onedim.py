import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_wasserstein
from slicediv.measures import SortedSupport1D
from slicediv.onedim import (
    Kernel1D,
    cramer_1d,
    mmd_1d,
    sinkhorn_cost_1d,
    sinkhorn_divergence_1d,
    tv_1d,
    wasserstein_1d,
)
from slicediv.sinkhorn import SinkhornConfig


def S(locs, weights=None):
    return SortedSupport1D.from_samples(locs, weights)


def random_weighted(rng, n):
    w = rng.random(n) + 0.05
    return S(rng.normal(size=n), w / w.sum())


D0, D1 = S([0.0]), S([1.0])


def test_wasserstein_hand_values():
    assert wasserstein_1d(D0, D1, 2) == pytest.approx(1.0)
    assert wasserstein_1d(S([0, 2]), S([1, 3]), 1) == pytest.approx(1.0)
    mu = S([0.3, -1.0, 2.0])
    assert wasserstein_1d(mu, mu, 3) == 0.0


def test_wasserstein_rejects_small_p():
    with pytest.raises(ValueError):
        wasserstein_1d(D0, D1, 0.5)


def test_wasserstein_matches_permutations(rng):
    for _ in range(30):
        n = rng.integers(1, 6)
        x, y = rng.normal(size=n), rng.normal(size=n)
        p = rng.choice([1.0, 1.5, 2.0, 3.0])
        assert wasserstein_1d(S(x), S(y), p) == pytest.approx(brute_force_wasserstein(x, y, p), rel=1e-9)


def test_wasserstein_weighted_hand_value():
    # mass 0.25 moves from 0 to 1, the rest stays at 0
    mu, nu = S([0.0]), S([0.0, 1.0], [0.75, 0.25])
    assert wasserstein_1d(mu, nu, 1) == pytest.approx(0.25)
    assert wasserstein_1d(mu, nu, 2) == pytest.approx(0.5)


def test_cramer_hand_values():
    assert cramer_1d(D0, D1, 1) == pytest.approx(1.0)
    assert cramer_1d(D0, D1, 2) == pytest.approx(1.0)
    mu = S([0, 1, 5])
    assert cramer_1d(mu, mu, 2) == 0.0
    # F differs by 1/2 on [0, 2)
    assert cramer_1d(S([0, 1]), S([1, 2]), 2) == pytest.approx(np.sqrt(0.25 * 2))


def test_cramer_equals_w1(rng):
    for _ in range(50):
        mu, nu = random_weighted(rng, rng.integers(1, 8)), random_weighted(rng, rng.integers(1, 8))
        assert cramer_1d(mu, nu, 1) == pytest.approx(wasserstein_1d(mu, nu, 1), rel=1e-10, abs=1e-12)


def test_mmd_values():
    rbf = Kernel1D("rbf", 1.0)
    assert mmd_1d(D0, D1, rbf) == pytest.approx(np.sqrt(2 - 2 * np.exp(-1)), rel=1e-12)
    mu = S([0, 3])
    assert mmd_1d(mu, mu, rbf) == 0.0


def test_mmd_linear_is_mean_gap(rng):
    mu, nu = random_weighted(rng, 5), random_weighted(rng, 7)
    gap = abs(mu.locations @ mu.weights - nu.locations @ nu.weights)
    assert mmd_1d(mu, nu, Kernel1D("linear", None)) == pytest.approx(gap, rel=1e-9)


def test_kernel_validation():
    with pytest.raises(ValueError):
        Kernel1D("rbf", 0.0)
    with pytest.raises(ValueError):
        Kernel1D("poly", 1.0)


def test_tv_values():
    assert tv_1d(D0, D1) == 2.0
    assert tv_1d(S([0, 1]), S([0, 2])) == pytest.approx(1.0)
    assert tv_1d(S([0, 1]), S([0, 1])) == 0.0


def test_tv_merges_near_ties():
    assert tv_1d(S([0.0]), S([1e-14])) == 0.0


def test_sinkhorn_single_atom():
    res = sinkhorn_cost_1d(D0, D0, SinkhornConfig(0.5))
    assert res.transport_cost == 0.0 and res.iterations == 1
    for eps in (0.01, 1.0, 10.0):
        assert sinkhorn_cost_1d(D0, D1, SinkhornConfig(eps)).transport_cost == pytest.approx(1.0)


def test_sinkhorn_small_eps_identity():
    res = sinkhorn_cost_1d(S([0, 1]), S([0, 1]), SinkhornConfig(1e-3))
    assert res.transport_cost <= 5e-3


def test_sinkhorn_divergence_values():
    cfg = SinkhornConfig(0.1)
    mu = S([0.0, 0.5, 2.0])
    assert sinkhorn_divergence_1d(mu, mu, cfg) == 0.0
    v = sinkhorn_divergence_1d(D0, D1, cfg)
    assert v > 0 and v == pytest.approx(sinkhorn_divergence_1d(D1, D0, cfg), rel=1e-12)
    w1 = SinkhornConfig(1e-3, cost_exponent=1.0)
    assert sinkhorn_divergence_1d(S([0, 1]), S([2, 3]), w1) == pytest.approx(2.0, abs=1e-2)


finite = st.floats(-10, 10, allow_nan=False)
samples = st.lists(finite, min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(samples, samples, samples)
def test_wasserstein_triangle(x, y, z):
    a, b, c = S(x), S(y), S(z)
    assert wasserstein_1d(a, c, 2) <= wasserstein_1d(a, b, 2) + wasserstein_1d(b, c, 2) + 1e-9


@settings(max_examples=60, deadline=None)
@given(samples, samples)
def test_symmetry_and_reflection(x, y):
    a, b = S(x), S(y)
    ra, rb = S(-np.asarray(x)), S(-np.asarray(y))
    for fn in (lambda u, v: wasserstein_1d(u, v, 2), lambda u, v: cramer_1d(u, v, 2), tv_1d,
               lambda u, v: mmd_1d(u, v, Kernel1D("rbf", 2.0))):
        value = fn(a, b)
        # abs slack: MMD is the square root of a cancelling sum, so ~1e-8 noise is expected
        assert fn(b, a) == pytest.approx(value, rel=1e-9, abs=1e-7)
        assert fn(ra, rb) == pytest.approx(value, rel=1e-9, abs=1e-7)
