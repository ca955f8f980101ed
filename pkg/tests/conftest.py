import itertools
import warnings

import numpy as np
import pytest

from slicediv.sinkhorn import SinkhornConvergenceWarning


def brute_force_wasserstein(X, Y, p):
    """Minimum over all permutations of the mean ||x_i - y_sigma(i)||^p, to the power 1/p."""
    X = np.asarray(X, dtype=float).reshape(len(X), -1)
    Y = np.asarray(Y, dtype=float).reshape(len(Y), -1)
    best = np.inf
    for perm in itertools.permutations(range(len(Y))):
        diff = X - Y[list(perm)]
        best = min(best, float(np.mean(np.linalg.norm(diff, axis=1) ** p)))
    return best ** (1.0 / p)


def kummer_series(a, c, z, tol=1e-12, max_terms=100_000):
    """Confluent hypergeometric M(a, c, z) by direct summation."""
    term, total = 1.0, 1.0
    for k in range(max_terms):
        term *= (a + k) / (c + k) * z / (k + 1)
        total += term
        if abs(term) < tol:
            return total
    raise RuntimeError("series did not converge")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_sinkhorn():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SinkhornConvergenceWarning)
        yield


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
