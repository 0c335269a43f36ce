"""Scaling functions for window lengths.

A scaling function ``f`` is non-decreasing with ``f(1) = 1`` and
``f(l) >= l**gamma`` for ``l >= 1``, plus a ratio condition
``inf_{l <= d_n} f(l (1 - l/n)) / f(l) -> 1`` whenever ``d_n**2 / n -> 0``.
Two families are provided: pure powers and powers times a log factor.

The ratio condition cannot be checked exhaustively. For ``x**g`` the ratio is
``(1 - l/n)**g >= (1 - d_n/n)**g -> 1``; the log factor adds
``log(1 + l(1 - l/n)) / log(1 + l) >= 1 - O(d_n / n)``, so both families
satisfy it for every admissible ``d_n``. :func:`check_membership` verifies
one representative sequence ``d_n = floor(n**0.4)`` numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScalingFunction:
    family: str
    gamma: float
    gamma_prime: float | None = None
    beta: float | None = None
    normalizer: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            out = x**self.gamma_prime
        elif self.family == "power_log":
            out = x**self.gamma * (np.log1p(x) / _LN2) ** self.beta
        else:
            raise ValueError(f"unknown scaling family {self.family!r}")
        return out if out.ndim else float(out)

    @property
    def exponent(self):
        """Leading power of ``f``."""
        return self.gamma_prime if self.family == "power" else self.gamma

    def to_json(self):
        if self.family == "power":
            return {"family": "power", "gamma_prime": self.gamma_prime, "gamma": self.gamma}
        return {"family": "power_log", "gamma": self.gamma, "beta": self.beta}

    @classmethod
    def from_json(cls, obj):
        fam = obj.get("family")
        if fam == "power":
            gp = float(obj["gamma_prime"])
            return make_power(gp, float(obj.get("gamma", gp)))
        if fam == "power_log":
            return make_power_log(float(obj["gamma"]), float(obj.get("beta", 1.0)))
        raise ValueError(f"unknown scaling family {fam!r}; expected 'power' or 'power_log'")


def make_power(gamma_prime: float, gamma: float | None = None) -> ScalingFunction:
    """``f(x) = x**gamma_prime``, a member of the class for any ``gamma <= gamma_prime``."""
    gamma = gamma_prime if gamma is None else gamma
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    if gamma_prime < gamma:
        raise ValueError(f"gamma_prime={gamma_prime} must be >= gamma={gamma}")
    return ScalingFunction("power", float(gamma), gamma_prime=float(gamma_prime))


def make_power_log(gamma: float, beta: float) -> ScalingFunction:
    """``f(x) = x**gamma * log(1+x)**beta / log(2)**beta``."""
    if gamma <= 0 or beta <= 0:
        raise ValueError("power_log needs gamma > 0 and beta > 0")
    return ScalingFunction("power_log", float(gamma), beta=float(beta), normalizer=_LN2**beta)


@dataclass
class MembershipReport:
    clauses: dict = field(default_factory=dict)
    ratio_infima: list = field(default_factory=list)
    ratio_ns: list = field(default_factory=list)

    @property
    def passed(self):
        return all(self.clauses.values())

    def failures(self):
        return [name for name, ok in self.clauses.items() if not ok]


def check_membership(f: ScalingFunction, n_max: int) -> MembershipReport:
    """Grid checks of the class conditions; violations are reported, not raised."""
    if n_max < 16:
        raise ValueError("n_max must be at least 16")
    report = MembershipReport()
    grid = np.arange(1, n_max + 1, dtype=float)
    vals = f(grid)
    report.clauses["unit_at_one"] = bool(f(1.0) == 1.0)
    report.clauses["non_decreasing"] = bool(np.all(np.diff(vals) >= 0))
    report.clauses["power_lower_bound"] = bool(np.all(vals >= grid**f.gamma))
    for n in (n_max // 4, n_max // 2, n_max):
        d = max(1, int(math.floor(n**0.4)))
        ell = np.arange(1, d + 1, dtype=float)
        ratio = f(ell * (1.0 - ell / n)) / f(ell)
        report.ratio_ns.append(n)
        report.ratio_infima.append(float(np.min(ratio)))
    report.clauses["ratio_condition"] = report.ratio_infima[-1] >= 0.99
    return report
