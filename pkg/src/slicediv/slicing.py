"""Monte Carlo slicing of one-dimensional base divergences.

Two aggregation conventions coexist on purpose:

* ``sliced_divergence`` averages the p-th powers of the base divergence over
  the sampled directions and takes the p-th root of the mean.
* ``sliced_sinkhorn`` averages the per-direction regularized OT values as is,
  with no power and no root.

For the Sinkhorn kinds inside ``sliced_divergence`` the regularized value
already lives on the ``W_p^p`` scale, so it is used directly as the p-th
power term. Hence ``sliced_divergence(kind="sinkhorn_divergence").value`` is
the p-th root of the debiased ``sliced_sinkhorn`` value (clamped at zero).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .measures import EmpiricalMeasure, SeedSpec, as_seed, project, sample_directions
from .onedim import (
    Kernel1D,
    cramer_1d,
    mmd_1d,
    sinkhorn_cost_1d,
    sinkhorn_divergence_terms_1d,
    tv_1d,
    wasserstein_1d,
)
from .sinkhorn import SinkhornConfig

KINDS = ("wasserstein", "cramer", "mmd", "sinkhorn_cost", "sinkhorn_divergence", "tv")
SINKHORN_KINDS = ("sinkhorn_cost", "sinkhorn_divergence")


class ProjectionError(RuntimeError):
    """A base divergence failed on one projection; ``index`` says which."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"projection {index} failed: {cause}")
        self.index = index


@dataclass(frozen=True)
class BaseDivergenceSpec:
    kind: str = "wasserstein"
    p: float = 2.0
    kernel: Kernel1D | None = None
    sinkhorn: SinkhornConfig | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown base divergence {self.kind!r}; expected one of {KINDS}")
        if not self.p >= 1:
            raise ValueError("order p must be >= 1")
        if self.kind == "mmd" and self.kernel is None:
            raise ValueError("mmd base needs a kernel")
        if self.kind in SINKHORN_KINDS:
            if self.sinkhorn is None:
                raise ValueError(f"{self.kind} base needs a SinkhornConfig")
            if self.p != self.sinkhorn.cost_exponent:
                raise ValueError("order p must equal the Sinkhorn cost exponent")


@dataclass(frozen=True, eq=False)
class SlicedEstimate:
    value: float
    per_projection: np.ndarray
    L: int
    seed: SeedSpec | None
    std_error: float
    p: float = 1.0
    iterations: np.ndarray | None = field(default=None)
    cross_objective: np.ndarray | None = field(default=None)


class McErrorCheck(NamedTuple):
    observed_error: float
    bound: float


def _std_error(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return float("nan")
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def _resolve_directions(d, L, seed, directions):
    if directions is None:
        if L is None:
            raise ValueError("pass either L or an explicit direction set")
        seed = as_seed(seed)
        return sample_directions(d, L, seed), seed
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if directions.shape[1] != d:
        raise ValueError(f"directions have dimension {directions.shape[1]}, measures have {d}")
    return directions, (as_seed(seed) if seed is not None else None)


def _map_indexed(fn, count, workers):
    # results land in an index-ordered buffer, so reductions never depend on scheduling
    if workers is None or workers <= 1 or count <= 1:
        return [fn(l) for l in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _guarded(fn):
    def run(l):
        try:
            return fn(l)
        except Exception as exc:  # re-raised with the projection index attached
            raise ProjectionError(l, exc) from exc

    return run


def _base_power(base: BaseDivergenceSpec, a, b):
    """Return ``(Delta^p, iterations or None)`` on one projection."""
    kind, p = base.kind, base.p
    if kind == "wasserstein":
        return wasserstein_1d(a, b, p) ** p, None
    if kind == "cramer":
        return cramer_1d(a, b, p) ** p, None
    if kind == "mmd":
        return mmd_1d(a, b, base.kernel) ** p, None
    if kind == "tv":
        return tv_1d(a, b) ** p, None
    if kind == "sinkhorn_cost":
        res = sinkhorn_cost_1d(a, b, base.sinkhorn)
        return res.regularized_objective, res.iterations
    value, cross = sinkhorn_divergence_terms_1d(a, b, base.sinkhorn)
    return max(value, 0.0), cross.iterations


def _uniform_wasserstein_powers(X, Y, thetas, p, chunk=1024):
    # equal-size uniform measures: W_p^p is the mean gap between order statistics
    out = np.empty(thetas.shape[0])
    for start in range(0, thetas.shape[0], chunk):
        block = thetas[start:start + chunk]
        px = np.sort(X @ block.T, axis=0)
        py = np.sort(Y @ block.T, axis=0)
        gaps = np.abs(px - py)
        out[start:start + chunk] = np.mean(gaps if p == 1 else gaps**p, axis=0)
    return out


def _check_pair(mu, nu):
    if mu.d != nu.d:
        raise ValueError(f"dimension mismatch: {mu.d} vs {nu.d}")


def sliced_divergence(
    mu: EmpiricalMeasure,
    nu: EmpiricalMeasure,
    base: BaseDivergenceSpec,
    L: int | None = None,
    seed=None,
    directions=None,
    workers: int = 1,
) -> SlicedEstimate:
    """Monte Carlo sliced divergence ``((1/L) sum_l Delta^p(theta_l mu, theta_l nu))^(1/p)``.

    Parameters
    ----------
    mu, nu : EmpiricalMeasure
        Measures on the same R^d.
    base : BaseDivergenceSpec
        One-dimensional base divergence and its order p.
    L : int, optional
        Number of directions drawn from ``seed``. Ignored if ``directions``
        is given.
    seed : int or SeedSpec, optional
        Direction ``l`` is drawn from substream ``l`` of this seed.
    directions : ndarray, shape (L, d), optional
        Explicit unit directions, e.g. to share a set between calls.
    workers : int
        Threads evaluating projections; the result does not depend on it.

    Returns
    -------
    SlicedEstimate
        ``per_projection`` holds the p-th power terms.
    """
    _check_pair(mu, nu)
    thetas, seed = _resolve_directions(mu.d, L, seed, directions)
    if base.kind == "wasserstein" and mu.n == nu.n and mu.is_uniform() and nu.is_uniform():
        values = _uniform_wasserstein_powers(mu.points, nu.points, thetas, base.p)
        return SlicedEstimate(
            value=float(np.sum(values) / values.size) ** (1.0 / base.p),
            per_projection=values,
            L=values.size,
            seed=seed,
            std_error=_std_error(values),
            p=base.p,
        )

    def one(l):
        return _base_power(base, project(mu, thetas[l]), project(nu, thetas[l]))

    out = _map_indexed(_guarded(one), thetas.shape[0], workers)
    values = np.array([v for v, _ in out], dtype=float)
    iterations = None
    if base.kind in SINKHORN_KINDS:
        iterations = np.array([it for _, it in out], dtype=int)
    mean = float(np.sum(values) / values.size)
    return SlicedEstimate(
        value=mean ** (1.0 / base.p),
        per_projection=values,
        L=values.size,
        seed=seed,
        std_error=_std_error(values),
        p=base.p,
        iterations=iterations,
    )


def sliced_sinkhorn(
    mu: EmpiricalMeasure,
    nu: EmpiricalMeasure,
    cfg: SinkhornConfig,
    L: int | None = None,
    seed=None,
    variant: str = "cost",
    directions=None,
    workers: int = 1,
) -> SlicedEstimate:
    """Sliced-Sinkhorn: plain average of per-direction regularized OT values.

    ``variant="cost"`` averages the regularized objective ``W_eps``;
    ``variant="divergence"`` averages the debiased Sinkhorn divergence.
    No p-th power or root is applied.
    """
    if variant not in ("cost", "divergence"):
        raise ValueError("variant must be 'cost' or 'divergence'")
    _check_pair(mu, nu)
    thetas, seed = _resolve_directions(mu.d, L, seed, directions)

    def one(l):
        a, b = project(mu, thetas[l]), project(nu, thetas[l])
        if variant == "cost":
            res = sinkhorn_cost_1d(a, b, cfg)
            return res.regularized_objective, res.iterations, res.regularized_objective
        value, cross = sinkhorn_divergence_terms_1d(a, b, cfg)
        return value, cross.iterations, cross.regularized_objective

    out = _map_indexed(_guarded(one), thetas.shape[0], workers)
    values = np.array([v for v, _, _ in out], dtype=float)
    return SlicedEstimate(
        value=float(np.sum(values) / values.size),
        per_projection=values,
        L=values.size,
        seed=seed,
        std_error=_std_error(values),
        p=1.0,
        iterations=np.array([it for _, it, _ in out], dtype=int),
        cross_objective=np.array([c for _, _, c in out], dtype=float),
    )


def mc_error_bound_check(per_projection, reference_value: float) -> McErrorCheck:
    """Both sides of the projection-complexity inequality for one draw.

    ``observed_error`` is ``|mean - reference|`` and ``bound`` is
    ``L^{-1/2}`` times the root-mean-square deviation of the per-projection
    terms around ``reference``. The inequality holds in expectation only.
    """
    values = np.asarray(per_projection, dtype=float)
    if values.size < 2:
        raise ValueError("need at least two projections")
    observed = abs(float(values.mean()) - reference_value)
    spread = float(np.sqrt(np.mean((values - reference_value) ** 2)))
    return McErrorCheck(observed, spread / np.sqrt(values.size))


def _sliced_rbf_terms(diffs, h, thetas):
    return np.exp(-((diffs @ thetas.T) ** 2) / h)


def sliced_rbf_kernel(x, y, h: float, L: int | None = None, seed=None, directions=None, return_std_error=False):
    """Monte Carlo estimate of ``int exp(-<theta, x - y>^2 / h) dsigma(theta)``.

    The exact value is the Kummer function ``M(1/2, d/2, -|x - y|^2 / h)``.
    """
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    diff = np.asarray(x, dtype=float).reshape(-1) - np.asarray(y, dtype=float).reshape(-1)
    thetas, _ = _resolve_directions(diff.size, L, seed, directions)
    terms = _sliced_rbf_terms(diff[None, :], h, thetas)[0]
    value = float(terms.mean())
    if return_std_error:
        return value, _std_error(terms)
    return value


def sliced_rbf_gram(points, h: float, L: int | None = None, seed=None, directions=None, chunk: int = 2048):
    points = np.asarray(points, dtype=float)
    n, d = points.shape
    thetas, _ = _resolve_directions(d, L, seed, directions)
    proj = points @ thetas.T
    gram = np.zeros((n, n))
    for start in range(0, thetas.shape[0], chunk):
        block = proj[:, start:start + chunk]
        gram += np.exp(-((block[:, None, :] - block[None, :, :]) ** 2) / h).sum(axis=2)
    return gram / thetas.shape[0]


def psd_gap_check(points, h: float, L: int | None = None, seed=None, directions=None) -> float:
    """Smallest eigenvalue of ``Gram(sliced rbf) - Gram(rbf)`` on ``points``."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] > 64:
        raise ValueError("psd_gap_check expects an (n, d) array with n <= 64")
    if not h > 0:
        raise ValueError("bandwidth h must be positive")
    sq = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=2)
    gap = sliced_rbf_gram(points, h, L, seed, directions) - np.exp(-sq / h)
    return float(np.linalg.eigvalsh(0.5 * (gap + gap.T))[0])
