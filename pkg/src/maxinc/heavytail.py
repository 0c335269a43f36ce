"""Regularly varying jump laws with exact Pareto radius.

The radius ``R = ||X||`` satisfies ``P(R > x) = x**-alpha`` for ``x >= 1``
(slowly varying factor fixed to one), so the normalizing quantile has the
closed form ``a_n = n**(1/alpha)``. Scalar laws put mass ``p`` on the right
tail and ``q = 1 - p`` on the left; vector laws draw the direction from a
discrete or uniform spectral measure on the Euclidean unit sphere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class Centering(str, enum.Enum):
    NONE = "none"
    ANALYTIC_MEAN = "analytic_mean"
    EMPIRICAL = "empirical"
    # diagnostic only: subtracts E(X 1{||X|| <= a_n}) for the sample size at hand
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class SpectralMeasure:
    """Law of ``X / ||X||``: ``kind`` is ``"uniform"`` or ``"discrete"``."""

    kind: str = "uniform"
    points: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "discrete"):
            raise ValueError(f"unknown spectral kind {self.kind!r}")
        if self.kind == "discrete":
            if len(self.points) == 0:
                raise ValueError("discrete spectral measure needs at least one point")
            pts = np.asarray(self.points, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if pts.ndim != 2 or len(w) != len(pts):
                raise ValueError("spectral points must be a (m, dim) array with m weights")
            if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("spectral weights must be non-negative and sum to 1")
            if not np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12):
                raise ValueError("spectral points must lie on the unit sphere")

    def mean(self, dim):
        if self.kind == "uniform":
            return np.zeros(dim)
        return np.asarray(self.weights, float) @ np.asarray(self.points, float)

    def to_json(self):
        if self.kind == "uniform":
            return {"kind": "uniform"}
        return {
            "kind": "discrete",
            "points": [list(map(float, p)) for p in self.points],
            "weights": [float(w) for w in self.weights],
        }

    @classmethod
    def from_json(cls, obj):
        if obj is None:
            return cls()
        if obj.get("kind", "uniform") == "uniform":
            return cls()
        return cls(
            kind="discrete",
            points=tuple(tuple(map(float, p)) for p in obj["points"]),
            weights=tuple(map(float, obj["weights"])),
        )


@dataclass(frozen=True)
class HeavyTailLaw:
    alpha: float
    p: float = 0.5
    dim: int = 1
    centering: Centering = Centering.NONE
    spectral: SpectralMeasure = field(default_factory=SpectralMeasure)

    def __post_init__(self):
        object.__setattr__(self, "centering", Centering(self.centering))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.centering is Centering.ANALYTIC_MEAN and self.alpha <= 1:
            raise ValueError("analytic_mean centering needs alpha > 1 (the mean is infinite otherwise)")
        if self.spectral.kind == "discrete" and len(self.spectral.points[0]) != self.dim:
            raise ValueError("spectral points do not match dim")

    @property
    def q(self):
        return 1.0 - self.p

    def radius_mean(self):
        """``E R = alpha / (alpha - 1)``; infinite for ``alpha <= 1``."""
        return self.alpha / (self.alpha - 1.0) if self.alpha > 1 else math.inf

    def direction_mean(self):
        if self.dim == 1:
            return np.array([self.p - self.q])
        return self.spectral.mean(self.dim)

    def mean(self):
        """Mean of the uncentered law (scalar for ``dim == 1``)."""
        m = self.radius_mean() * self.direction_mean()
        return float(m[0]) if self.dim == 1 else m

    def truncated_mean(self, level):
        """``E(X 1{||X|| <= level})``, finite for every alpha."""
        if level < 1:
            return 0.0 if self.dim == 1 else np.zeros(self.dim)
        if self.alpha == 1:
            r = math.log(level)
        else:
            r = self.alpha / (self.alpha - 1.0) * (1.0 - level ** (1.0 - self.alpha))
        m = r * self.direction_mean()
        return float(m[0]) if self.dim == 1 else m

    def variance(self):
        """Per-coordinate variance of a scalar law; needs ``alpha > 2``."""
        if self.dim != 1:
            raise ValueError("variance() is defined for scalar laws only")
        if self.alpha <= 2:
            return math.inf
        second = self.alpha / (self.alpha - 2.0)
        return second - (self.radius_mean() * (self.p - self.q)) ** 2

    def with_centering(self, centering):
        return HeavyTailLaw(self.alpha, self.p, self.dim, Centering(centering), self.spectral)

    def to_json(self):
        return {
            "alpha": self.alpha,
            "p": self.p,
            "dim": self.dim,
            "centering": self.centering.value,
            "spectral": self.spectral.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            alpha=float(obj["alpha"]),
            p=float(obj.get("p", 0.5)),
            dim=int(obj.get("dim", 1)),
            centering=Centering(obj.get("centering", "none")),
            spectral=SpectralMeasure.from_json(obj.get("spectral")),
        )


@dataclass(frozen=True)
class SeedStream:
    """Per-replication stream: ``SeedSequence(master_seed, spawn_key=(index,))``."""

    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if self.replication_index < 0:
            raise ValueError("replication_index must be non-negative")

    def rng(self):
        ss = np.random.SeedSequence(int(self.master_seed) % 2**64, spawn_key=(int(self.replication_index),))
        return np.random.Generator(np.random.PCG64(ss))


def _pareto_radius(rng, alpha, n):
    # 1 - U lies in (0, 1], so the radius is finite and >= 1
    return (1.0 - rng.random(n)) ** (-1.0 / alpha)


def _center(x, law, n):
    if law.centering is Centering.NONE:
        return x
    if law.centering is Centering.ANALYTIC_MEAN:
        return x - law.mean()
    if law.centering is Centering.EMPIRICAL:
        return x - x.mean(axis=0)
    return x - law.truncated_mean(norm_quantile(law, n))


def sample_scalar(law: HeavyTailLaw, n: int, seed: SeedStream) -> np.ndarray:
    """Draw ``n`` i.i.d. two-sided unit-Pareto jumps, centered per the law."""
    if law.dim != 1:
        raise ValueError("sample_scalar needs a scalar law (dim == 1)")
    if n < 1:
        raise ValueError("n must be positive")
    rng = seed.rng()
    radius = _pareto_radius(rng, law.alpha, n)
    sign = np.where(rng.random(n) < law.p, 1.0, -1.0)
    return _center(sign * radius, law, n)


def _sphere(rng, n, dim):
    g = rng.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def sample_vector(law: HeavyTailLaw, n: int, seed: SeedStream) -> np.ndarray:
    """Draw ``n`` vectors ``R * Theta`` in R^dim, shape ``(n, dim)``."""
    if law.dim < 2:
        raise ValueError("sample_vector needs dim >= 2; use sample_scalar")
    if n < 1:
        raise ValueError("n must be positive")
    rng = seed.rng()
    radius = _pareto_radius(rng, law.alpha, n)
    spec = law.spectral
    if spec.kind == "uniform":
        theta = _sphere(rng, n, law.dim)
    else:
        pts = np.asarray(spec.points, dtype=float)
        idx = rng.choice(len(pts), size=n, p=np.asarray(spec.weights, float))
        theta = pts[idx]
    return _center(radius[:, None] * theta, law, n)


def sample(law: HeavyTailLaw, n: int, seed: SeedStream) -> np.ndarray:
    return sample_scalar(law, n, seed) if law.dim == 1 else sample_vector(law, n, seed)


def norm_quantile(law: HeavyTailLaw, n: int) -> float:
    """``a_n``: the ``(1 - 1/n)``-quantile of the uncentered radius, ``n**(1/alpha)``."""
    if n < 2:
        raise ValueError(f"a_n needs n >= 2, got {n}")
    return float(n) ** (1.0 / law.alpha)


def hill_estimate(sample, k: int) -> float:
    """Hill estimator of the tail index from the ``k`` largest norms."""
    x = np.asarray(sample, dtype=float)
    norms = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=1)
    n = norms.shape[0]
    if not 2 <= k < n:
        raise ValueError(f"k must satisfy 2 <= k < {n}, got {k}")
    top = -np.sort(-norms)[: k + 1]
    if top[k] <= 0:
        raise ValueError("the top k+1 norms must be strictly positive")
    denom = np.sum(np.log(top[:k] / top[k]))
    if denom <= 0:
        raise ValueError("tied upper order statistics make the Hill estimate undefined")
    return k / denom


def weissman_quantile(sample, k: int, alpha_hat: float, n: int | None = None) -> float:
    """Tail-extrapolated ``(1 - 1/n)``-quantile of the norms: ``X_(k+1) * k**(1/alpha_hat)``."""
    x = np.asarray(sample, dtype=float)
    norms = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=1)
    size = norms.shape[0]
    n = size if n is None else n
    threshold = -np.sort(-norms)[k]
    return float(threshold * (k * n / size) ** (1.0 / alpha_hat))


def outer_square(x) -> np.ndarray:
    """``x (x) x`` as a d x d matrix; its operator norm is ``||x||**2``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.size < 1:
        raise ValueError("outer_square expects a non-empty vector")
    return np.outer(x, x)


def log_survival_slope(values, x_min, x_max, points=30):
    """Least-squares slope of log empirical survival vs log x on a log grid."""
    v = np.sort(np.asarray(values, dtype=float))
    grid = np.geomspace(x_min, x_max, points)
    surv = 1.0 - np.searchsorted(v, grid, side="right") / v.size
    keep = surv > 0
    slope, _ = np.polyfit(np.log(grid[keep]), np.log(surv[keep]), 1)
    return float(slope)
