"""Exact base divergences between one-dimensional discrete measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import SortedSupport1D
from .sinkhorn import (
    SinkhornConfig,
    SinkhornResult,
    debiased,
    sinkhorn,
    sinkhorn_symmetric,
)

TIE_TOL = 1e-12


@dataclass(frozen=True)
class Kernel1D:
    """``linear``: k(s, t) = s t.  ``rbf``: k(s, t) = exp(-|s - t|^2 / bandwidth)."""

    kind: str = "rbf"
    bandwidth: float | None = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not (self.bandwidth is not None and self.bandwidth > 0):
            raise ValueError("rbf kernel needs a positive bandwidth")

    def gram(self, s, t) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return np.outer(s, t)
        return np.exp(-((s[:, None] - t[None, :]) ** 2) / self.bandwidth)


def _check_p(p):
    if not p >= 1:
        raise ValueError(f"order p must be >= 1, got {p!r}")


def _cumulative(w):
    c = np.cumsum(w)
    c[-1] = 1.0
    return c


def wasserstein_1d(mu: SortedSupport1D, nu: SortedSupport1D, p: float = 2.0) -> float:
    """W_p between 1D discrete measures via their quantile functions.

    The cumulative weights of both measures split [0, 1] into segments on
    which both quantile functions are constant; the p-th power of the
    distance is the width-weighted sum of ``|F_mu^-1 - F_nu^-1|^p``.
    """
    _check_p(p)
    cw, cv = _cumulative(mu.weights), _cumulative(nu.weights)
    u = np.concatenate([cw, cv])
    u.sort(kind="mergesort")
    widths = np.diff(np.concatenate([[0.0], u]))
    iw = np.minimum(np.searchsorted(cw, u, side="left"), mu.size - 1)
    iv = np.minimum(np.searchsorted(cv, u, side="left"), nu.size - 1)
    gaps = np.abs(mu.locations[iw] - nu.locations[iv])
    total = float(np.sum(widths * gaps**p))
    return total ** (1.0 / p)


def cramer_1d(mu: SortedSupport1D, nu: SortedSupport1D, p: float = 2.0) -> float:
    """Cramér distance ``(int |F_mu - F_nu|^p dt)^(1/p)`` between CDFs."""
    _check_p(p)
    t = np.concatenate([mu.locations, nu.locations])
    t.sort(kind="mergesort")
    F_mu = np.concatenate([[0.0], _cumulative(mu.weights)])[np.searchsorted(mu.locations, t[:-1], side="right")]
    F_nu = np.concatenate([[0.0], _cumulative(nu.weights)])[np.searchsorted(nu.locations, t[:-1], side="right")]
    total = float(np.sum(np.abs(F_mu - F_nu) ** p * np.diff(t)))
    return total ** (1.0 / p)


def mmd_1d(mu: SortedSupport1D, nu: SortedSupport1D, kernel: Kernel1D) -> float:
    """Biased (V-statistic) MMD, square root clamped at zero."""
    x, w = mu.locations, mu.weights
    y, v = nu.locations, nu.weights
    sq = w @ kernel.gram(x, x) @ w + v @ kernel.gram(y, y) @ v - 2.0 * (w @ kernel.gram(x, y) @ v)
    return float(np.sqrt(max(sq, 0.0)))


def cost_matrix_1d(s, t, p: float) -> np.ndarray:
    diff = np.abs(np.asarray(s, dtype=float)[:, None] - np.asarray(t, dtype=float)[None, :])
    if p == 1:
        return diff
    if p == 2:
        return diff * diff
    return diff**p


def sinkhorn_cost_1d(mu: SortedSupport1D, nu: SortedSupport1D, cfg: SinkhornConfig) -> SinkhornResult:
    cost = cost_matrix_1d(mu.locations, nu.locations, cfg.cost_exponent)
    return sinkhorn(cost, mu.weights, nu.weights, cfg)


def self_sinkhorn_1d(mu: SortedSupport1D, cfg: SinkhornConfig) -> SinkhornResult:
    cost = cost_matrix_1d(mu.locations, mu.locations, cfg.cost_exponent)
    return sinkhorn_symmetric(cost, mu.weights, cfg)


def same_support(mu: SortedSupport1D, nu: SortedSupport1D) -> bool:
    return mu is nu or (
        np.array_equal(mu.locations, nu.locations) and np.array_equal(mu.weights, nu.weights)
    )


def sinkhorn_divergence_terms_1d(mu, nu, cfg):
    """Return ``(debiased value, cross-term result)``."""
    self_mu = self_sinkhorn_1d(mu, cfg)
    if same_support(mu, nu):
        return debiased(self_mu, self_mu, self_mu), self_mu
    self_nu = self_sinkhorn_1d(nu, cfg)
    cross = sinkhorn_cost_1d(mu, nu, cfg)
    return debiased(cross, self_mu, self_nu), cross


def sinkhorn_divergence_1d(mu: SortedSupport1D, nu: SortedSupport1D, cfg: SinkhornConfig) -> float:
    """``W_eps(mu, nu) - (W_eps(mu, mu) + W_eps(nu, nu)) / 2`` on regularized objectives."""
    return sinkhorn_divergence_terms_1d(mu, nu, cfg)[0]


def tv_1d(mu: SortedSupport1D, nu: SortedSupport1D) -> float:
    """Total variation as the IPM over |f| <= 1, i.e. the sum of atom-mass differences."""
    loc = np.concatenate([mu.locations, nu.locations])
    mass = np.concatenate([mu.weights, -nu.weights])
    order = np.argsort(loc, kind="stable")
    loc, mass = loc[order], mass[order]
    starts = np.concatenate([[True], np.diff(loc) > TIE_TOL])
    groups = np.add.reduceat(mass, np.flatnonzero(starts))
    return float(min(np.abs(groups).sum(), 2.0))
