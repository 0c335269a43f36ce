"""Limit laws for the normalized statistics and goodness-of-fit distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from maxinc import kernels
from maxinc.heavytail import SeedStream


def frechet_cdf(alpha, x):
    """``exp(-x**-alpha)`` for ``x > 0``, zero otherwise."""
    return frechet_power_cdf(alpha, 1.0, x)


def frechet_power_cdf(alpha, r, x):
    """``exp(-r * x**-alpha)``; ``r = q/p`` and ``r = 2`` are the cases used here."""
    if alpha <= 0 or r <= 0:
        raise ValueError("alpha and r must be positive")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(divide="ignore", over="ignore"):
        if float(r).is_integer():
            # integer powers of the base CDF, so that r = 2 squares Phi exactly
            out[pos] = np.exp(-(x[pos] ** -alpha)) ** int(r)
        else:
            out[pos] = np.exp(-r * x[pos] ** -alpha)
    return out if out.ndim else float(out)


def frechet_quantile(alpha, u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("u must lie strictly inside (0, 1)")
    out = (-np.log(u)) ** (-1.0 / alpha)
    return out if out.ndim else float(out)


def frechet_power_quantile(alpha, r, u):
    """Inverse of ``exp(-r x**-alpha)``: ``(r / -log u)**(1/alpha)``."""
    return r ** (1.0 / alpha) * frechet_quantile(alpha, u)


def joint_one_sided_cdf(alpha, p, x, y):
    """Limit of ``P(m/b_n <= -x, M/b_n <= y)``: ``Phi(y) (1 - Phi(x)**(q/p))``."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    r = (1.0 - p) / p
    return frechet_cdf(alpha, y) * (1.0 - frechet_power_cdf(alpha, r, x))


def gumbel_cdf(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(-x))
    return out if out.ndim else float(out)


@dataclass
class CdfTable:
    x: np.ndarray
    F: np.ndarray
    max_error: float = 0.0

    def cdf(self, x):
        out = np.interp(x, self.x, self.F, left=0.0, right=1.0)
        return out if np.ndim(out) else float(out)

    def rows(self):
        return zip(self.x.tolist(), self.F.tolist())


def default_range_grid(alpha, p, points=2000, tail=1e-8):
    """Log-spaced grid between the ``tail`` and ``1 - tail`` quantiles of the two summands."""
    r = (1.0 - p) / p
    lo = min(frechet_quantile(alpha, tail), frechet_power_quantile(alpha, r, tail))
    hi = frechet_quantile(alpha, 1 - tail) + frechet_power_quantile(alpha, r, 1 - tail)
    return np.geomspace(lo, hi, points)


def range_limit_cdf(alpha, p, x_grid=None, tol=1e-6) -> CdfTable:
    """CDF of ``Y + Z`` with independent ``Y ~ Phi`` and ``Z ~ Phi**(q/p)``.

    The convolution is split at ``s/2`` into one piece per summand, each in
    quantile form, so both integrands are bounded by one on a bounded range::

        F(s) = int_0^{G_Y(s/2)} G_Z(s - Q_Y(u)) du
             + int_0^{G_Z(s/2)} G_Y(s - Q_Z(v)) dv - G_Y(s/2) G_Z(s/2)

    with ``G``/``Q`` the CDFs and quantile functions.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    r = (1.0 - p) / p
    xs = default_range_grid(alpha, p) if x_grid is None else np.asarray(x_grid, dtype=float)

    def piece(u, s, c_q, c_cdf):
        # Q for exp(-c_q x**-alpha) at u, fed into the CDF exp(-c_cdf x**-alpha)
        if u <= 0:
            return math.exp(-c_cdf * s**-alpha)
        y = (c_q / -math.log(u)) ** (1.0 / alpha)
        return math.exp(-c_cdf * (s - y) ** -alpha)

    F = np.empty(xs.shape)
    worst = 0.0
    for i, s in enumerate(xs):
        if s <= 0:
            F[i] = 0.0
            continue
        gy = math.exp(-((s / 2) ** -alpha))
        gz = math.exp(-r * (s / 2) ** -alpha)
        total = -gy * gz
        for c_q, c_cdf, top in ((1.0, r, gy), (r, 1.0, gz)):
            if top == 0.0:
                continue
            val, err = integrate.quad(piece, 0.0, top, args=(s, c_q, c_cdf), epsabs=1e-12, epsrel=1e-10, limit=500)
            total += val
            worst = max(worst, err)
        F[i] = total
    if worst > tol:
        raise ArithmeticError(f"range-law quadrature did not converge: error estimate {worst:.2e} > {tol:.0e}")
    return CdfTable(xs, np.maximum.accumulate(np.clip(F, 0.0, 1.0)), worst)


def simulate_holder_functional(gamma, grid_size, seed: SeedStream, sigma=1.0, *, backend=None):
    """One draw of ``sup_{s != t} |W(t) - W(s)| / |t - s|**gamma`` on the grid ``i / grid_size``."""
    if not 0 <= gamma < 0.5:
        raise ValueError("gamma must lie in [0, 1/2); the functional diverges under refinement otherwise")
    if grid_size < 2**10:
        raise ValueError("grid_size must be at least 2**10")
    N = int(grid_size)
    steps = seed.rng().standard_normal(N) * (sigma / math.sqrt(N))
    path = np.concatenate([[0.0], np.cumsum(steps)])
    lags = np.arange(1, N + 1)
    norms = np.ones(N + 1)
    norms[1:] = (lags / N) ** gamma
    v, _, _ = kernels.scan_abs(path, steps, norms, lags, backend=backend)
    return v


def holder_sample(gamma, grid_size, draws, master_seed, sigma=1.0):
    return np.array(
        [simulate_holder_functional(gamma, grid_size, SeedStream(master_seed, i), sigma) for i in range(draws)]
    )


def ks_distance(sample, cdf) -> float:
    """Sup distance between the sample's ECDF (both one-sided limits) and ``cdf``."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("sample must be non-empty")
    if np.any(np.diff(x) < 0):
        raise ValueError("sample must be sorted ascending")
    F = np.asarray(cdf(x), dtype=float)
    n = x.size
    left = np.searchsorted(x, x, side="left") / n
    right = np.searchsorted(x, x, side="right") / n
    return float(max(np.max(np.abs(left - F)), np.max(np.abs(right - F))))


def ks_two_sample(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


@dataclass
class LimitLaw:
    """Reference law for an experiment.

    ``reflected`` turns a law of ``Z`` into the law of ``-Z`` (the one-sided
    minimum converges to minus a Fréchet-power variable). ``samples`` backs the
    simulated ``holder_functional`` law.
    """

    kind: str
    alpha: float = 1.0
    r: float = 1.0
    p: float = 0.5
    gamma: float = 0.0
    reflected: bool = False
    samples: np.ndarray | None = field(default=None, repr=False)
    _table: CdfTable | None = field(default=None, repr=False)

    KINDS = ("frechet", "frechet_power", "joint_one_sided", "range_convolution", "gumbel", "holder_functional")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown limit law {self.kind!r}; valid: {', '.join(self.KINDS)}")
        if self.alpha <= 0 or self.r <= 0 or not 0 < self.p < 1:
            raise ValueError("limit law needs alpha > 0, r > 0 and 0 < p < 1")
        if self.kind == "holder_functional" and not 0 <= self.gamma < 0.5:
            raise ValueError("holder_functional needs 0 <= gamma < 1/2")

    def _base_cdf(self, x):
        if self.kind == "frechet":
            return frechet_cdf(self.alpha, x)
        if self.kind == "frechet_power":
            return frechet_power_cdf(self.alpha, self.r, x)
        if self.kind == "gumbel":
            return gumbel_cdf(x)
        if self.kind == "range_convolution":
            if self._table is None:
                self._table = range_limit_cdf(self.alpha, self.p)
            return self._table.cdf(x)
        if self.kind == "holder_functional":
            if self.samples is None:
                raise ValueError("holder_functional law has no simulated sample attached")
            s = np.sort(self.samples)
            return np.searchsorted(s, x, side="right") / s.size
        raise ValueError("joint_one_sided is bivariate; use cdf2")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if not self.reflected:
            return self._base_cdf(x)
        # P(-Z <= x) = 1 - P(Z < -x); the base laws here are continuous
        return 1.0 - self._base_cdf(-x)

    def cdf2(self, x, y):
        if self.kind != "joint_one_sided":
            raise ValueError("cdf2 is only defined for joint_one_sided")
        return joint_one_sided_cdf(self.alpha, self.p, x, y)

    def to_json(self):
        out = {"kind": self.kind, "alpha": self.alpha}
        if self.kind == "frechet_power":
            out["r"] = self.r
        if self.kind in ("joint_one_sided", "range_convolution"):
            out["p"] = self.p
        if self.kind == "holder_functional":
            out["gamma"] = self.gamma
        if self.reflected:
            out["reflected"] = True
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(
            kind=obj["kind"],
            alpha=float(obj.get("alpha", 1.0)),
            r=float(obj.get("r", 1.0)),
            p=float(obj.get("p", 0.5)),
            gamma=float(obj.get("gamma", 0.0)),
            reflected=bool(obj.get("reflected", False)),
        )
