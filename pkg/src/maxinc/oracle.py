"""Brute-force reference for every statistic.

Each window sum is re-derived from the jumps by direct summation (no prefix
sums); windows are visited with ``l`` outer and ``k`` inner, ascending, and
only a strict improvement replaces the incumbent. That reproduces the
smallest-``l``-then-``k`` tie rule of the fast kernels by construction.
"""

from __future__ import annotations

import math

import numpy as np

from maxinc.stats import IncrementStatistic, Mode, WalkData, _descriptor, parse_mode, prefix_sums

MAX_N = 5000


def _sqrt(x):
    return x**0.5


def brute_force_oracle(walk, mode, f=None, gamma=None, mu=0.0) -> IncrementStatistic:
    if not isinstance(walk, WalkData):
        walk = prefix_sums(walk)
    mode = parse_mode(mode)
    n = walk.n
    if n > MAX_N:
        raise ValueError(f"oracle is guarded to n <= {MAX_N}, got {n}")
    vector = walk.is_vector
    if vector:
        cols = [list(map(float, c)) for c in walk.jumps.T]
    else:
        x = list(map(float, walk.jumps))

    def wsum(a, b):
        if vector:
            return [sum(c[a:b]) for c in cols]
        return sum(x[a:b])

    def size(v):
        return math.hypot(*v) if vector else abs(v)

    def minus(v, c):
        if vector:
            return [a - c_ for a, c_ in zip(v, c)]
        return v - c

    if mode in (Mode.T_N, Mode.T_TILDE_N, Mode.M_N, Mode.M_TILDE_N):
        f = _sqrt
        gamma = 0.5
    elif mode is Mode.T and gamma is None:
        gamma = f.exponent

    if mode in (Mode.T, Mode.T_N, Mode.T_TILDE, Mode.T_TILDE_N):
        if n < 2:
            raise ValueError("centered statistics need n >= 2")
        if vector:
            xbar = [sum(c) / n for c in cols]
        else:
            xbar = sum(x) / n
            if all(v == x[0] for v in x):
                xbar = x[0]
    if vector and mode not in (Mode.M_TILDE, Mode.T_TILDE):
        raise ValueError(f"mode {mode.value} is scalar-only")
    if mode is Mode.M_HAT and n < 3:
        raise ValueError("M_hat needs n >= 3")
    mu_vec = [mu] * len(cols) if vector else mu

    best = None
    minimize = mode is Mode.m
    centered = mode in (Mode.T, Mode.T_N, Mode.T_TILDE, Mode.T_TILDE_N)
    signed = mode in (Mode.M, Mode.m, Mode.M_N, Mode.T, Mode.T_N)
    for l in range(1, n + 1):
        if centered:
            if l == n:
                break
            g = l * (1.0 - l / n)
            norm = g**gamma if mode in (Mode.T, Mode.T_N) else f(g)
            shift = [l * c for c in xbar] if vector else l * xbar
        elif mode is Mode.M_HAT:
            if l + 1 > n - l:
                break
            norm = f(float(l))
        else:
            norm = f(float(l))
            shift = [l * c for c in mu_vec] if vector else l * mu
        if vector:
            for k in range(0, n - l + 1):
                v = size(minus(wsum(k, k + l), shift)) / norm
                if best is None or v > best[0]:
                    best = (v, l, k)
            continue
        # scalar loops are inlined: this oracle runs on thousands of walks
        if mode is Mode.M_HAT:
            vals = [(sum(x[k:k + l]) - sum(x[k - l:k])) / norm for k in range(l + 1, n - l + 1)]
            k0 = l + 1
        elif signed:
            vals = [(sum(x[k:k + l]) - shift) / norm for k in range(n - l + 1)]
            k0 = 0
        else:
            vals = [abs(sum(x[k:k + l]) - shift) / norm for k in range(n - l + 1)]
            k0 = 0
        for j, v in enumerate(vals):
            if best is None or (v < best[0] if minimize else v > best[0]):
                best = (v, l, k0 + j)
    desc = _descriptor(gamma if f is _sqrt or f is None else f)
    return IncrementStatistic(float(best[0]), best[2], best[1], mode, desc, n)


def oracle_pair(walk, f):
    """``(m, M)`` computed by the oracle, mirroring ``stats.stat_one_sided``."""
    return brute_force_oracle(walk, Mode.m, f), brute_force_oracle(walk, Mode.M, f)


def random_walk_cases(count, rng, n_range=(5, 200)):
    """Mixed light/heavy-tailed jump sequences for equivalence sweeps."""
    out = []
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        kind = i % 4
        if kind == 0:
            x = rng.standard_normal(n)
        elif kind == 1:
            a = float(rng.uniform(0.5, 4.0))
            x = np.where(rng.random(n) < 0.5, 1.0, -1.0) * (1.0 - rng.random(n)) ** (-1.0 / a)
        elif kind == 2:
            x = rng.integers(-3, 4, size=n).astype(float)
        else:
            x = rng.standard_cauchy(n)
        out.append(x)
    return out
