"""Empirical measures, one-dimensional push-forwards and seeded direction sampling."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

WEIGHT_TOL = 1e-12
ORTHO_TOL = 1e-10

# spawn-key tags keeping direction streams apart from data streams
_DIRECTION_TAG = 0
_CHILD_TAG = 1


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a deterministic substream derivation.

    ``stream(*index)`` always returns a fresh generator for the same index, so
    any job can rebuild its randomness without knowing what ran before it.
    """

    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    def _sequence(self, *index: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.master_seed), spawn_key=tuple(int(i) for i in index))

    def stream(self, *index: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self._sequence(*index)))

    def child(self, *index: int) -> "SeedSpec":
        """A new SeedSpec whose master seed is derived from ``(master_seed, index)``."""
        state = self._sequence(_CHILD_TAG, *index).generate_state(1, dtype=np.uint64)
        return SeedSpec(int(state[0]))


def as_seed(seed) -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        return SeedSpec(0)
    return SeedSpec(int(seed))


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Weighted point cloud in R^d.

    Parameters
    ----------
    points : ndarray, shape (n, d)
    weights : ndarray, shape (n,)
        Nonnegative, summing to one.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"points must be a non-empty (n, d) array, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise ValueError("points contain non-finite coordinates")
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.shape[0] != points.shape[0]:
            raise ValueError(f"{weights.shape[0]} weights for {points.shape[0]} points")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {weights.sum()!r}, expected 1")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0])) or bool(
            np.allclose(self.weights, 1.0 / self.n, rtol=0, atol=WEIGHT_TOL)
        )

    def same_as(self, other: "EmpiricalMeasure") -> bool:
        return other is self or (
            np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class SortedSupport1D:
    """One-dimensional discrete measure with ascending atoms."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        locations = np.array(self.locations, dtype=float).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if locations.size < 1 or locations.shape != weights.shape:
            raise ValueError("locations and weights must be non-empty and of equal length")
        if not np.all(np.isfinite(locations)):
            raise ValueError("locations contain non-finite values")
        if np.any(np.diff(locations) < 0):
            raise ValueError("locations must be sorted ascending")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        locations.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.locations.size

    @classmethod
    def from_samples(cls, values, weights=None) -> "SortedSupport1D":
        values = np.asarray(values, dtype=float).reshape(-1)
        if weights is None:
            weights = np.full(values.size, 1.0 / values.size)
        order = np.argsort(values, kind="stable")
        return cls(values[order], np.asarray(weights, dtype=float)[order])


def make_uniform_empirical(points) -> EmpiricalMeasure:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.size == 0:
        raise ValueError("empty point set")
    n = points.shape[0]
    return EmpiricalMeasure(points, np.full(n, 1.0 / n))


def project(mu: EmpiricalMeasure, theta) -> SortedSupport1D:
    """Push ``mu`` forward by x -> <theta, x>, atoms stably sorted (ties kept)."""
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != mu.d:
        raise ValueError(f"direction has dimension {theta.shape[0]}, measure has {mu.d}")
    values = mu.points @ theta
    order = np.argsort(values, kind="stable")
    return SortedSupport1D(values[order], mu.weights[order])


def _direction(seed: SeedSpec, d: int, index: int) -> np.ndarray:
    rng = seed.stream(_DIRECTION_TAG, index)
    while True:
        g = rng.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


def sample_directions(d: int, L: int, seed=None) -> np.ndarray:
    """Draw ``L`` i.i.d. uniform directions on S^{d-1}.

    Row ``l`` is a normalized standard Gaussian vector drawn from substream
    ``l`` of ``seed``, so it depends on ``(seed, d, l)`` only. In particular
    the first ``L`` rows of a longer draw equal a draw of size ``L``.

    Returns
    -------
    ndarray, shape (L, d)
    """
    if d < 1 or L < 1:
        raise ValueError("need d >= 1 and L >= 1")
    seed = as_seed(seed)
    return np.stack([_direction(seed, d, l) for l in range(L)])


def translate(mu: EmpiricalMeasure, v) -> EmpiricalMeasure:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != mu.d:
        raise ValueError("translation vector dimension mismatch")
    return EmpiricalMeasure(mu.points + v, mu.weights)


def rotate(mu: EmpiricalMeasure, Q) -> EmpiricalMeasure:
    """Image of ``mu`` under x -> Q x for an orthogonal ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (mu.d, mu.d):
        raise ValueError(f"rotation must be {mu.d}x{mu.d}")
    if not np.allclose(Q.T @ Q, np.eye(mu.d), rtol=0, atol=ORTHO_TOL):
        raise ValueError("matrix is not orthogonal")
    return EmpiricalMeasure(mu.points @ Q.T, mu.weights)


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _is_numeric_row(tokens) -> bool:
    try:
        [float(t) for t in tokens]
    except ValueError:
        return False
    return True


def load_points(path) -> np.ndarray:
    """Read a delimited numeric text file (comma or whitespace, optional header).

    Returns
    -------
    ndarray, shape (n, d)
    """
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: no data rows")
    delimiter = "," if "," in lines[0] else None

    def split(line):
        parts = line.split(delimiter)
        return [p.strip() for p in parts] if delimiter else parts

    if not _is_numeric_row(split(lines[0])):
        lines = lines[1:]
        if not lines:
            raise ValueError(f"{path}: header without data rows")
    width = len(split(lines[0]))
    for k, line in enumerate(lines):
        tokens = split(line)
        if len(tokens) != width:
            raise ValueError(f"{path}: row {k + 1} has {len(tokens)} columns, expected {width}")
        if not _is_numeric_row(tokens):
            raise ValueError(f"{path}: row {k + 1} is not numeric")
    data = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=delimiter, ndmin=2)
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite values")
    return data


def load_measure(path) -> EmpiricalMeasure:
    return make_uniform_empirical(load_points(path))
