"""Unsliced reference divergences on R^d."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist, pdist

from .measures import EmpiricalMeasure, as_seed, sample_directions
from .onedim import Kernel1D
from .sinkhorn import SinkhornConfig, SinkhornResult, debiased, sinkhorn, sinkhorn_symmetric


class UnsupportedInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AssignmentResult:
    cost: float
    permutation: np.ndarray


def cost_matrix(X, Y, p: float) -> np.ndarray:
    """``||x_i - y_j||^p`` computed from explicit differences."""
    if p == 2:
        return cdist(X, Y, "sqeuclidean")
    dist = cdist(X, Y, "euclidean")
    return dist if p == 1 else dist**p


def wasserstein_exact(mu: EmpiricalMeasure, nu: EmpiricalMeasure, p: float = 2.0) -> AssignmentResult:
    """Exact W_p between two uniform measures with the same number of atoms.

    For such pairs an optimal plan is a permutation, found here by the
    shortest-augmenting-path assignment solver.
    """
    if not p >= 1:
        raise ValueError("order p must be >= 1")
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
    if mu.n != nu.n or not (mu.is_uniform() and nu.is_uniform()):
        raise UnsupportedInputError("exact W_p needs two uniform measures of equal size")
    C = cost_matrix(mu.points, nu.points, p)
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(mu.n, dtype=int)
    perm[rows] = cols
    total = float(C[rows, cols].sum() / mu.n)
    return AssignmentResult(total ** (1.0 / p), perm)


def sinkhorn_nd(mu: EmpiricalMeasure, nu: EmpiricalMeasure, cfg: SinkhornConfig) -> SinkhornResult:
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
    C = cost_matrix(mu.points, nu.points, cfg.cost_exponent)
    return sinkhorn(C, mu.weights, nu.weights, cfg)


def _self_sinkhorn(mu, cfg):
    C = cost_matrix(mu.points, mu.points, cfg.cost_exponent)
    return sinkhorn_symmetric(C, mu.weights, cfg)


def sinkhorn_divergence_terms_nd(mu, nu, cfg):
    self_mu = _self_sinkhorn(mu, cfg)
    if mu.same_as(nu):
        return debiased(self_mu, self_mu, self_mu), self_mu
    cross = sinkhorn_nd(mu, nu, cfg)
    return debiased(cross, self_mu, _self_sinkhorn(nu, cfg)), cross


def sinkhorn_divergence_nd(mu: EmpiricalMeasure, nu: EmpiricalMeasure, cfg: SinkhornConfig) -> float:
    return sinkhorn_divergence_terms_nd(mu, nu, cfg)[0]


def _gram(kernel: Kernel1D, X, Y):
    if kernel.kind == "linear":
        return X @ Y.T
    return np.exp(-cdist(X, Y, "sqeuclidean") / kernel.bandwidth)


def mmd_nd(mu: EmpiricalMeasure, nu: EmpiricalMeasure, kernel: Kernel1D) -> float:
    """Biased MMD with ``k(x, y) = exp(-||x - y||^2 / h)`` or ``x . y``."""
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")
    w, v = mu.weights, nu.weights
    sq = (
        w @ _gram(kernel, mu.points, mu.points) @ w
        + v @ _gram(kernel, nu.points, nu.points) @ v
        - 2.0 * (w @ _gram(kernel, mu.points, nu.points) @ v)
    )
    return float(np.sqrt(max(sq, 0.0)))


def median_heuristic_width(points_all) -> float:
    """Median pairwise Euclidean distance of the pooled samples.

    The matching rbf bandwidth is the square of this width, since kernels
    here are written ``exp(-r^2 / h)``.
    """
    points_all = np.asarray(points_all, dtype=float)
    if points_all.ndim == 1:
        points_all = points_all[:, None]
    if points_all.shape[0] < 2:
        raise ValueError("median heuristic needs at least two points")
    width = float(np.median(pdist(points_all)))
    if width <= 0:
        raise ValueError("median pairwise distance is zero; points are (mostly) identical")
    return width


def median_heuristic_kernel(*measures: EmpiricalMeasure) -> Kernel1D:
    pooled = np.concatenate([m.points for m in measures])
    return Kernel1D("rbf", median_heuristic_width(pooled) ** 2)


def projected_spread_bound(R: float, n: int, delta: float, d: int) -> float:
    """High-probability bound ``(2 R^2 / d) log(sqrt(2 pi) n^2 / delta)`` on the
    squared spread of a point set along a uniform random direction."""
    if not R > 0 or n < 1 or d < 1 or not 0 < delta <= 1:
        raise ValueError("need R > 0, n >= 1, d >= 1 and 0 < delta <= 1")
    return 2.0 * R**2 / d * np.log(np.sqrt(2.0 * np.pi) * n**2 / delta)


def projected_spread_trial(points, trials: int, delta: float, seed=None, others=None, directions=None) -> float:
    """Fraction of random directions whose squared projected spread beats the bound.

    With ``others`` given, spreads and ``R`` are taken over the cross
    differences ``x_i - y_j`` instead of the pooled pairs within ``points``.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if others is None:
        R2 = float(pdist(X, "sqeuclidean").max()) if n > 1 else 0.0
    else:
        Y = np.asarray(others, dtype=float).reshape(-1, d)
        R2 = float(cdist(X, Y, "sqeuclidean").max())
        n = max(n, Y.shape[0])
    if R2 == 0.0:
        return 0.0
    bound = projected_spread_bound(np.sqrt(R2), n, delta, d)
    thetas = directions if directions is not None else sample_directions(d, trials, as_seed(seed))
    px = X @ np.asarray(thetas).T
    if others is None:
        spread = (px.max(axis=0) - px.min(axis=0)) ** 2
    else:
        py = Y @ np.asarray(thetas).T
        spread = np.maximum(px.max(axis=0) - py.min(axis=0), py.max(axis=0) - px.min(axis=0)) ** 2
    return float(np.mean(spread > bound))
