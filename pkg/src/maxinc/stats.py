"""Maximum-increment statistics of a random walk.

All statistics share the same shape: a maximum over window length ``l`` and
start ``k`` of a normalized window increment ``S_{k+l} - S_k``. The work is
done by the scans in :mod:`maxinc.kernels`; this module builds the prefix
arrays and per-length normalizers and wraps the result.

Modes
-----
``M_tilde``  max_l f(l)^-1 max_k ||S_{k+l} - S_k||,                1 <= l <= n
``T_tilde``  max_l f(l(1-l/n))^-1 max_k ||S_{k+l} - S_k - l xbar||, 1 <= l < n
``M`` / ``m``  one-sided max / min of f(l)^-1 (S_{k+l} - S_k)
``T``        max_l (l(1-l/n))^-gamma max_k (S_{k+l} - S_k - l xbar)
``M_hat``    max_l f(l)^-1 max_{l<k<=n-l} (S_{k+l} + S_{k-l} - 2 S_k)
``T_n``, ``T_tilde_n``, ``M_n``, ``M_tilde_n``  the square-root-normalized originals
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from maxinc import kernels
from maxinc.scaling import ScalingFunction, make_power

PAIRWISE_THRESHOLD = 2**15
_PREFIX_BLOCK = 1024


class Mode(str, enum.Enum):
    M_TILDE = "M_tilde"
    T_TILDE = "T_tilde"
    M = "M"
    m = "m"
    T = "T"
    M_HAT = "M_hat"
    RANGE = "range"
    T_N = "T_n"
    T_TILDE_N = "T_tilde_n"
    M_N = "M_n"
    M_TILDE_N = "M_tilde_n"


ONE_SIDED_MODES = frozenset({Mode.M, Mode.m, Mode.T, Mode.RANGE, Mode.T_N, Mode.M_N})
CLASSIC_MODES = frozenset({Mode.T_N, Mode.T_TILDE_N, Mode.M_N, Mode.M_TILDE_N})


def parse_mode(name) -> Mode:
    try:
        return Mode(name)
    except ValueError:
        valid = ", ".join(m.value for m in Mode)
        raise ValueError(f"unknown mode {name!r}; valid modes: {valid}") from None


def _blocked_cumsum(x):
    # block totals via numpy's pairwise reduction, then two short sequential scans
    n = x.shape[0]
    nb = -(-n // _PREFIX_BLOCK)
    pad = nb * _PREFIX_BLOCK - n
    xp = np.concatenate([x, np.zeros((pad,) + x.shape[1:])]) if pad else x
    blocks = xp.reshape((nb, _PREFIX_BLOCK) + x.shape[1:])
    totals = np.add.reduce(blocks, axis=1)
    offsets = np.concatenate([np.zeros((1,) + x.shape[1:]), np.cumsum(totals, axis=0)[:-1]])
    inner = np.cumsum(blocks, axis=1) + offsets[:, None]
    return inner.reshape((nb * _PREFIX_BLOCK,) + x.shape[1:])[:n]


def _cumsum(x):
    body = _blocked_cumsum(x) if x.shape[0] > PAIRWISE_THRESHOLD else np.cumsum(x, axis=0)
    return np.concatenate([np.zeros((1,) + x.shape[1:]), body])


@dataclass
class WalkData:
    """Jumps and their partial sums ``S_0 = 0, ..., S_n``."""

    jumps: np.ndarray
    prefix: np.ndarray
    _centered: tuple | None = field(default=None, repr=False)

    @property
    def n(self):
        return self.jumps.shape[0]

    @property
    def is_vector(self):
        return self.jumps.ndim == 2

    def mean(self):
        x = self.jumps
        if np.all(x == x[0]):
            return x[0].copy() if self.is_vector else float(x[0])
        if self.is_vector:
            return np.array([math.fsum(col) for col in x.T]) / self.n
        return math.fsum(x) / self.n

    def centered(self):
        """Jumps minus their sample mean, and the matching prefix array."""
        if self._centered is None:
            y = self.jumps - self.mean()
            self._centered = (y, _cumsum(y))
        return self._centered


def prefix_sums(jumps) -> WalkData:
    """Build :class:`WalkData`; vectors are summed componentwise."""
    x = np.array(jumps, dtype=float)
    if x.ndim == 0 or x.shape[0] == 0:
        raise ValueError("need at least one jump")
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    if x.ndim > 2:
        raise ValueError("jumps must be a sequence of reals or of R^d vectors")
    return WalkData(x, _cumsum(x))


def _as_walk(walk):
    return walk if isinstance(walk, WalkData) else prefix_sums(walk)


@dataclass(frozen=True)
class IncrementStatistic:
    value: float
    arg_k: int
    arg_ell: int
    mode: Mode
    scaling: dict
    n: int

    def to_json(self):
        return {
            "mode": self.mode.value,
            "value": self.value,
            "k": self.arg_k,
            "ell": self.arg_ell,
            "n": self.n,
            "gamma": self.scaling.get("gamma"),
            "family": self.scaling.get("family"),
        }

    def scaled(self, c):
        return IncrementStatistic(self.value * c, self.arg_k, self.arg_ell, self.mode, self.scaling, self.n)


def _descriptor(f):
    return f.to_json() if isinstance(f, ScalingFunction) else {"family": "power", "gamma": float(f), "gamma_prime": float(f)}


def _norm_table(n, values, lengths):
    norms = np.ones(n + 1)
    norms[lengths] = values
    if np.any(norms[lengths] <= 0):
        raise ValueError("scaling function must be positive on the window lengths")
    return norms


def _require_scalar(walk, name):
    if walk.is_vector:
        raise ValueError(f"{name} is defined for scalar walks only")


def stat_M_tilde(walk, f: ScalingFunction, *, parallel=False, backend=None) -> IncrementStatistic:
    walk = _as_walk(walk)
    n = walk.n
    lengths = np.arange(1, n + 1)
    norms = _norm_table(n, f(lengths.astype(float)), lengths)
    order = kernels.ascending_order(norms, lengths)
    v, l, k = kernels.scan_abs(walk.prefix, walk.jumps, norms, order, parallel=parallel, backend=backend)
    return IncrementStatistic(v, k, l, Mode.M_TILDE, _descriptor(f), n)


def _bridge_lengths(n):
    if n < 2:
        raise ValueError("the centered statistics need n >= 2 (1 <= l < n is empty)")
    lengths = np.arange(1, n)
    lf = lengths.astype(float)
    return lengths, lf * (1.0 - lf / n)


def stat_T_tilde(walk, f: ScalingFunction, *, parallel=False, backend=None) -> IncrementStatistic:
    walk = _as_walk(walk)
    n = walk.n
    lengths, arg = _bridge_lengths(n)
    norms = _norm_table(n, f(arg), lengths)
    order = kernels.ascending_order(norms, lengths)
    y, P = walk.centered()
    v, l, k = kernels.scan_abs(P, y, norms, order, parallel=parallel, backend=backend)
    return IncrementStatistic(v, k, l, Mode.T_TILDE, _descriptor(f), n)


def stat_one_sided(walk, f: ScalingFunction, *, backend=None):
    """Return ``(m, M)``: the scaled minimum and maximum signed increments."""
    walk = _as_walk(walk)
    _require_scalar(walk, "stat_one_sided")
    n = walk.n
    lengths = np.arange(1, n + 1)
    norms = _norm_table(n, f(lengths.astype(float)), lengths)
    order = kernels.ascending_order(norms, lengths)
    M, Ml, Mk, m, ml, mk = kernels.scan_signed(walk.prefix, walk.jumps, norms, order, backend=backend)
    desc = _descriptor(f)
    return (
        IncrementStatistic(m, mk, ml, Mode.m, desc, n),
        IncrementStatistic(M, Mk, Ml, Mode.M, desc, n),
    )


def stat_T_one_sided(walk, gamma: float, *, backend=None) -> IncrementStatistic:
    walk = _as_walk(walk)
    _require_scalar(walk, "stat_T_one_sided")
    n = walk.n
    lengths, arg = _bridge_lengths(n)
    norms = _norm_table(n, arg**gamma, lengths)
    order = kernels.ascending_order(norms, lengths)
    y, P = walk.centered()
    M, Ml, Mk, *_ = kernels.scan_signed(P, y, norms, order, want_min=False, backend=backend)
    return IncrementStatistic(M, Mk, Ml, Mode.T, _descriptor(gamma), n)


def stat_hat(walk, f: ScalingFunction, *, backend=None) -> IncrementStatistic:
    """Second-difference statistic; only lengths with a non-empty start range are scanned."""
    walk = _as_walk(walk)
    _require_scalar(walk, "stat_hat")
    n = walk.n
    if n < 3:
        raise ValueError("stat_hat needs n >= 3")
    lengths = np.arange(1, (n - 1) // 2 + 1)
    norms = _norm_table(n, f(lengths.astype(float)), lengths)
    order = kernels.ascending_order(norms, lengths)
    v, l, k = kernels.scan_hat(walk.prefix, norms, order, backend=backend)
    return IncrementStatistic(v, k, l, Mode.M_HAT, _descriptor(f), n)


def stat_range(walk, f: ScalingFunction, *, backend=None) -> IncrementStatistic:
    """``M - m``; the recorded window is that of ``M``."""
    lo, hi = stat_one_sided(walk, f, backend=backend)
    return IncrementStatistic(hi.value - lo.value, hi.arg_k, hi.arg_ell, Mode.RANGE, hi.scaling, hi.n)


SQRT = make_power(0.5)


def stat_classic(walk, mode, mu=0.0, *, backend=None) -> IncrementStatistic:
    """The four square-root-normalized statistics; ``mu`` is the known mean for M_n and M_tilde_n."""
    walk = _as_walk(walk)
    mode = parse_mode(mode)
    if mode not in CLASSIC_MODES:
        raise ValueError(f"{mode.value} is not a classic mode")
    _require_scalar(walk, "stat_classic")
    if mode is Mode.T_N:
        r = stat_T_one_sided(walk, 0.5, backend=backend)
    elif mode is Mode.T_TILDE_N:
        r = stat_T_tilde(walk, SQRT, backend=backend)
    else:
        w = walk if mu == 0 else prefix_sums(walk.jumps - mu)
        if mode is Mode.M_N:
            r = stat_one_sided(w, SQRT, backend=backend)[1]
        else:
            r = stat_M_tilde(w, SQRT, backend=backend)
    return IncrementStatistic(r.value, r.arg_k, r.arg_ell, mode, r.scaling, r.n)


def compute(walk, mode, f: ScalingFunction | None = None, *, gamma=None, mu=0.0, backend=None):
    """Evaluate any mode by name; ``gamma`` defaults to ``f.exponent`` for mode ``T``."""
    mode = parse_mode(mode)
    walk = _as_walk(walk)
    if mode in CLASSIC_MODES:
        return stat_classic(walk, mode, mu, backend=backend)
    if mode is Mode.T:
        g = gamma if gamma is not None else f.exponent
        return stat_T_one_sided(walk, g, backend=backend)
    if f is None:
        raise ValueError(f"mode {mode.value} needs a scaling function")
    if mode is Mode.M_TILDE:
        return stat_M_tilde(walk, f, backend=backend)
    if mode is Mode.T_TILDE:
        return stat_T_tilde(walk, f, backend=backend)
    if mode is Mode.M_HAT:
        return stat_hat(walk, f, backend=backend)
    if mode is Mode.RANGE:
        return stat_range(walk, f, backend=backend)
    lo, hi = stat_one_sided(walk, f, backend=backend)
    return hi if mode is Mode.M else lo


def window_value(walk, stat: IncrementStatistic, f: ScalingFunction | None = None, mu=0.0) -> float:
    """Re-evaluate a statistic's formula at its recorded window by direct summation."""
    walk = _as_walk(walk)
    x = walk.jumps
    n, k, l = walk.n, stat.arg_k, stat.arg_ell
    mode = stat.mode
    if mode in (Mode.T_N, Mode.T_TILDE_N, Mode.M_N, Mode.M_TILDE_N):
        f = SQRT
    gamma = stat.scaling.get("gamma_prime", stat.scaling.get("gamma"))

    def wsum(a, b):
        if walk.is_vector:
            return np.array([math.fsum(c) for c in x[a:b].T])
        return math.fsum(x[a:b])

    def size(v):
        return float(np.linalg.norm(v)) if walk.is_vector else abs(v)

    if mode in (Mode.M_TILDE, Mode.M_TILDE_N):
        return size(wsum(k, k + l) - l * mu) / f(float(l))
    if mode in (Mode.M, Mode.m, Mode.M_N):
        return (wsum(k, k + l) - l * mu) / f(float(l))
    xbar = walk.mean()
    g = l * (1.0 - l / n)
    if mode is Mode.T_TILDE:
        return size(wsum(k, k + l) - l * xbar) / f(g)
    if mode is Mode.T_TILDE_N:
        return size(wsum(k, k + l) - l * xbar) / math.sqrt(g)
    if mode in (Mode.T, Mode.T_N):
        return (wsum(k, k + l) - l * xbar) / g ** (0.5 if mode is Mode.T_N else gamma)
    if mode is Mode.M_HAT:
        return (wsum(k, k + l) - wsum(k - l, k)) / f(float(l))
    raise ValueError(f"window_value does not handle mode {mode.value}")
