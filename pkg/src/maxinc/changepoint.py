"""Epidemic change-point test for the mean with Fréchet critical values.

Under the null the jumps are i.i.d. and regularly varying. Under the
epidemic alternative the mean moves by ``shift`` on the 1-based positions
``k*+1 .. m*`` and returns afterwards. The two-sided test uses the centered
absolute statistic ``T_tilde`` and the one-sided test the signed ``T``; both
are compared with ``a_n`` (or ``p**(1/alpha) a_n``) times a Fréchet quantile.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from maxinc import heavytail, limits, stats
from maxinc.heavytail import HeavyTailLaw, SeedStream
from maxinc.montecarlo import replicate
from maxinc.scaling import make_power
from maxinc.stats import Mode


class Sided(str, enum.Enum):
    TWO = "two_sided"
    ONE = "one_sided"


@dataclass(frozen=True)
class AlphaSource:
    """Where the tail index comes from: ``supplied`` (alpha, p) or ``hill`` (k)."""

    kind: str
    alpha: float | None = None
    p: float = 0.5
    k: int | None = None

    def __post_init__(self):
        if self.kind == "supplied":
            if self.alpha is None or self.alpha <= 0:
                raise ValueError("supplied alpha must be positive")
            if not 0 < self.p < 1:
                raise ValueError("p must lie in (0, 1)")
        elif self.kind == "hill":
            if self.k is None or self.k < 2:
                raise ValueError("hill needs k >= 2")
        else:
            raise ValueError(f"alpha source must be 'supplied' or 'hill', got {self.kind!r}")

    @classmethod
    def supplied(cls, alpha, p=0.5):
        return cls("supplied", alpha=float(alpha), p=float(p))

    @classmethod
    def hill(cls, k):
        return cls("hill", k=int(k))

    def to_json(self):
        if self.kind == "supplied":
            return {"kind": "supplied", "alpha": self.alpha, "p": self.p}
        return {"kind": "hill", "k": self.k}

    @classmethod
    def from_json(cls, obj):
        if obj.get("kind") == "hill":
            return cls.hill(obj["k"])
        return cls.supplied(obj["alpha"], obj.get("p", 0.5))


@dataclass(frozen=True)
class EpidemicSpec:
    k_star: int
    m_star: int
    shift: float

    @property
    def duration(self):
        return self.m_star - self.k_star

    def validate(self, n):
        if not 1 <= self.k_star < self.m_star < n:
            raise ValueError(f"need 1 <= k* < m* < n, got k*={self.k_star}, m*={self.m_star}, n={n}")


@dataclass
class DetectionReport:
    statistic: float
    normalizer: float
    normalizer_kind: str
    critical_value: float
    p_value: float
    reject: bool
    k: int
    ell: int
    alpha: float
    p: float
    alpha_source: str
    hill_k: int | None
    gamma: float
    sided: str
    n: int

    @property
    def candidate_interval(self):
        """1-based positions ``[k+1, k+ell]`` of the maximizing window."""
        return self.k + 1, self.k + self.ell

    def to_json(self):
        return {
            "statistic": self.statistic,
            "normalizer": self.normalizer,
            "normalizer_kind": self.normalizer_kind,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "k": self.k,
            "ell": self.ell,
            "candidate_interval": list(self.candidate_interval),
            "alpha": self.alpha,
            "p": self.p,
            "alpha_source": self.alpha_source,
            "hill_k": self.hill_k,
            "gamma": self.gamma,
            "sided": self.sided,
            "n": self.n,
        }


def gamma_floor(alpha):
    return max(0.0, 0.5 - 1.0 / alpha)


def default_gamma(alpha):
    """Smallest admissible exponent plus a 0.05 margin, capped below one."""
    return min(gamma_floor(alpha) + 0.05, 0.95)


def critical_value(alpha, p, n, level, sided=Sided.TWO, gamma=None, law: HeavyTailLaw | None = None):
    """Rejection threshold on the raw statistic.

    ``a_n`` comes from ``law`` when given, otherwise from the exact Pareto
    form ``n**(1/alpha)``. The threshold does not depend on ``gamma``; it is
    accepted only to check the admissibility bound.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if gamma is not None and not gamma > gamma_floor(alpha):
        raise ValueError(f"gamma={gamma} violates gamma > max(0, 1/2 - 1/alpha) = {gamma_floor(alpha):.6g}")
    a_n = heavytail.norm_quantile(law, n) if law is not None else float(n) ** (1.0 / alpha)
    q = limits.frechet_quantile(alpha, 1.0 - level)
    if Sided(sided) is Sided.ONE:
        return p ** (1.0 / alpha) * a_n * q
    return a_n * q


def _hill_plugin(x, k):
    """Tail index, tail balance and ``a_n`` estimated from the data.

    Norms are taken around the median. ``a_n`` is the Weissman estimate of
    the ``1 - 1/n`` quantile of the norm, which equals ``n**(1/alpha)`` for
    exact unit Pareto data.
    """
    n = x.size
    if not 2 <= k < n:
        raise ValueError(f"hill k must lie in [2, n), got k={k}, n={n}")
    y = x - np.median(x)
    norms = np.abs(y)
    alpha_hat = heavytail.hill_estimate(norms, k)
    a_n = heavytail.weissman_quantile(norms, k, alpha_hat, n)
    top = np.argsort(norms)[::-1][:k]
    p_hat = float(np.clip(np.mean(y[top] > 0), 1.0 / k, 1.0 - 1.0 / k))
    return alpha_hat, p_hat, a_n


def detect(data, gamma=None, level=0.05, sided=Sided.TWO, alpha_source: AlphaSource | None = None,
           law: HeavyTailLaw | None = None) -> DetectionReport:
    """Test for an epidemic change in the mean.

    ``law`` fixes ``a_n`` when the jump law is known beyond its tail index;
    with ``alpha_source='supplied'`` and no law the exact Pareto form is used.
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 1:
        raise ValueError("detect needs a one-dimensional sequence")
    n = x.size
    if n < 8:
        raise ValueError(f"detect needs n >= 8, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    sided = Sided(sided)
    if alpha_source is None:
        if law is None:
            raise ValueError("either alpha_source or law is required")
        alpha_source = AlphaSource.supplied(law.alpha, law.p)
    if alpha_source.kind == "supplied":
        alpha, p = alpha_source.alpha, alpha_source.p
        a_n = heavytail.norm_quantile(law, n) if law is not None else float(n) ** (1.0 / alpha)
    else:
        alpha, p, a_n = _hill_plugin(x, alpha_source.k)
    if gamma is None:
        gamma = default_gamma(alpha)
    if not gamma > gamma_floor(alpha):
        raise ValueError(f"gamma={gamma} violates gamma > max(0, 1/2 - 1/alpha) = {gamma_floor(alpha):.6g} at alpha={alpha:.6g}")
    if sided is Sided.TWO:
        st = stats.stat_T_tilde(x, make_power(gamma))
        norm, kind = a_n, "a_n"
    else:
        st = stats.stat_T_one_sided(x, gamma)
        norm, kind = p ** (1.0 / alpha) * a_n, "b_n"
    crit = norm * limits.frechet_quantile(alpha, 1.0 - level)
    pval = float(np.clip(1.0 - limits.frechet_cdf(alpha, st.value / norm), 0.0, 1.0))
    return DetectionReport(
        statistic=st.value,
        normalizer=norm,
        normalizer_kind=kind,
        critical_value=crit,
        p_value=pval,
        reject=bool(st.value > crit),
        k=st.arg_k,
        ell=st.arg_ell,
        alpha=float(alpha),
        p=float(p),
        alpha_source=alpha_source.kind,
        hill_k=alpha_source.k,
        gamma=float(gamma),
        sided=sided.value,
        n=n,
    )


def inject_epidemic(data, spec: EpidemicSpec) -> np.ndarray:
    """Add ``spec.shift`` to 1-based positions ``k*+1 .. m*`` (0-based ``k* .. m*-1``)."""
    x = np.array(data, dtype=float, copy=True)
    spec.validate(x.shape[0])
    x[spec.k_star:spec.m_star] += spec.shift
    return x


def centered_epidemic(n, duration, shift) -> EpidemicSpec:
    """Epidemic of the given duration placed in the middle of ``1..n``."""
    if not 1 <= duration <= n - 2:
        raise ValueError(f"duration must lie in [1, n-2], got {duration}")
    k = max(1, (n - duration) // 2)
    return EpidemicSpec(k, k + duration, float(shift))


def strong_shift(alpha, n, gamma, theta=0.8):
    """The shift ``5 a_n / l***(1-gamma)`` with ``l* = floor(n**theta)``; returns (shift, l*)."""
    dur = int(math.floor(n**theta))
    return 5.0 * n ** (1.0 / alpha) / dur ** (1.0 - gamma), dur


@dataclass
class PowerRow:
    param: float
    power: float
    se: float
    reps: int
    overlap: float


def _power_one(law, gamma, level, sided, src, specs, n, seed, r):
    base = heavytail.sample(law, n, SeedStream(seed, r))
    out = []
    for spec in specs:
        x = base if spec is None else inject_epidemic(base, spec)
        rep = detect(x, gamma, level, sided, src, law=law if src.kind == "supplied" else None)
        hit = False
        if spec is not None and rep.reject:
            lo, hi = rep.candidate_interval
            hit = lo <= spec.m_star and hi >= spec.k_star + 1
        out.append((rep.reject, hit))
    return out


def power_curve(law: HeavyTailLaw, gamma, level, n, reps, seed, *, shift_grid=None, theta_grid=None,
                duration=None, shift=None, sided=Sided.TWO, alpha_source: AlphaSource | None = None,
                workers=1):
    """Rejection frequency per grid point with its binomial standard error.

    With ``shift_grid`` the duration is fixed (default ``floor(n**0.8)``);
    with ``theta_grid`` the duration is ``floor(n**theta)`` and the shift is
    fixed. Every grid point reuses the same null samples, so differences
    between rows come from the injected signal alone.
    """
    if (shift_grid is None) == (theta_grid is None):
        raise ValueError("give exactly one of shift_grid or theta_grid")
    if reps < 1:
        raise ValueError("reps must be positive")
    src = alpha_source or AlphaSource.supplied(law.alpha, law.p)
    if shift_grid is not None:
        dur = int(duration or math.floor(n**0.8))
        params = [float(s) for s in shift_grid]
        specs = [None if s == 0 else centered_epidemic(n, dur, s) for s in params]
    else:
        if shift is None:
            raise ValueError("theta_grid needs a fixed shift")
        params = [float(t) for t in theta_grid]
        if any(not 0 < t < 1 for t in params):
            raise ValueError("theta values must lie in (0, 1)")
        specs = [centered_epidemic(n, int(math.floor(n**t)), shift) for t in params]
    res = replicate(_power_one, (law, gamma, level, Sided(sided), src, specs, n, seed), reps, workers)
    rows = []
    for j, param in enumerate(params):
        rej = np.array([r[j][0] for r in res], dtype=float)
        hit = np.array([r[j][1] for r in res], dtype=float)
        pw = float(rej.mean())
        rows.append(
            PowerRow(
                param=param,
                power=pw,
                se=math.sqrt(pw * (1 - pw) / reps),
                reps=reps,
                overlap=float(hit.sum() / rej.sum()) if rej.sum() else 0.0,
            )
        )
    return rows
