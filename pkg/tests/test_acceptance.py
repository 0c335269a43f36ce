"""Acceptance criteria, one test per criterion.

Each test prints ``criterion N: PASS|FAIL ...`` and records the line for the
summary section that conftest adds to the pytest report. The file also runs
as a script: ``python tests/test_acceptance.py [N ...]``.

Configurations are fixed up front (seeds included) and never tuned per run.
"""

import math
import sys
import time

import numpy as np
import pytest

from maxinc import changepoint as cp
from maxinc import heavytail as ht
from maxinc import limits, oracle, scaling, stats
from maxinc import montecarlo as mc
from maxinc.stats import Mode

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # pragma: no cover
    ACCEPTANCE_LINES = {}

SEEDS = (1, 2, 3)
N_SMALL, N_LARGE = 500, 8000
REPS = 2000
# exponent for the experiments whose scaling is left open
GAMMA_OPEN = 0.5

pytestmark = pytest.mark.slow


def record(num, ok, detail):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line, flush=True)
    return ok


def _law(alpha, p=0.5):
    centering = "analytic_mean" if alpha > 1 else "none"
    return ht.HeavyTailLaw(alpha, p, centering=centering)


def _ks_pair(law, f, mode, seed):
    out = []
    for n in (N_SMALL, N_LARGE):
        out.append(mc.run_experiment(mc.ExperimentConfig(law, f, mode, n, REPS, seed)))
    return out


def _trend_ok(small, large, tol):
    return large.ks <= tol and large.ks < small.ks


# --------------------------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    f = scaling.make_power(0.4)
    walks = oracle.random_walk_cases(500, rng, (5, 200))
    bad = []
    t0 = time.process_time()
    for i, x in enumerate(walks):
        walk = stats.prefix_sums(x)
        refs = {}
        for mode in Mode:
            fast = stats.compute(walk, mode, f)
            if mode is Mode.RANGE:
                ref_value = refs[Mode.M].value - refs[Mode.m].value
            else:
                refs[mode] = oracle.brute_force_oracle(walk, mode, f)
                ref_value = refs[mode].value
            if not np.isclose(fast.value, ref_value, rtol=1e-9, atol=0.0):
                bad.append((i, mode.value, fast.value, ref_value))
            elif mode is not Mode.RANGE:
                # a different window is fine only if it attains the same maximum
                if (fast.arg_k, fast.arg_ell) != (refs[mode].arg_k, refs[mode].arg_ell):
                    v = stats.window_value(walk, fast, f)
                    if not np.isclose(v, ref_value, rtol=1e-9, atol=0.0):
                        bad.append((i, mode.value, v, ref_value))
    elapsed = time.process_time() - t0
    ok = not bad and elapsed < 60.0
    detail = f"{len(walks)} walks x {len(Mode)} modes, {len(bad)} mismatches, {elapsed:.1f} s cpu"
    assert record(1, ok, detail), bad[:5]


def test_criterion_02_frechet_convergence():
    rows = []
    all_ok = True
    for alpha in (0.8, 1.5, 3.0):
        law = _law(alpha)
        f = scaling.make_power(max(0.0, 0.5 - 1.0 / alpha) + 0.1)
        for mode in (Mode.M_TILDE, Mode.T_TILDE):
            wins = 0
            ks = []
            for seed in SEEDS:
                small, large = _ks_pair(law, f, mode, seed)
                wins += _trend_ok(small, large, 0.08)
                ks.append(f"{small.ks:.3f}->{large.ks:.3f}")
            ok = wins >= 2
            all_ok &= ok
            rows.append(f"a={alpha} {mode.value}: {wins}/3 [{', '.join(ks)}]")
    assert record(2, all_ok, "; ".join(rows))


def test_criterion_03_joint_one_sided():
    grid = [0.5, 1.0, 2.0]
    errs = []
    for p in (0.5, 0.7):
        r = mc.joint_one_sided_experiment(
            _law(1.5, p), scaling.make_power(GAMMA_OPEN), N_LARGE, REPS, grid, grid, seed=11
        )
        errs.append((p, r.max_error))
    ok = all(e <= 0.03 for _, e in errs)
    assert record(3, ok, ", ".join(f"p={p}: max err {e:.4f}" for p, e in errs) + " (tol 0.03)")


def test_criterion_04_hat_statistic():
    law = _law(1.5)
    f = scaling.make_power(GAMMA_OPEN)
    wins = 0
    ks = []
    diag = []
    for seed in SEEDS:
        small, large = _ks_pair(law, f, Mode.M_HAT, seed)
        wins += _trend_ok(small, large, 0.08)
        ks.append(f"{small.ks:.3f}->{large.ks:.3f}")
        diag.append(limits.ks_distance(large.values, lambda x: limits.frechet_cdf(1.5, x)))
    ok = wins >= 2
    detail = (
        f"KS vs Phi^2: {wins}/3 [{', '.join(ks)}]; "
        f"diagnostic KS vs Phi at n={N_LARGE}: [{', '.join(f'{d:.3f}' for d in diag)}]"
    )
    assert record(4, ok, detail)


def test_criterion_05_range_law():
    res = []
    for p in (0.5, 0.7):
        cfg = mc.ExperimentConfig(
            _law(1.5, p), scaling.make_power(GAMMA_OPEN), Mode.RANGE, N_LARGE, REPS, 12,
            normalization="p_alpha_a_n",
        )
        res.append((p, mc.run_experiment(cfg).ks))
    ok = all(k <= 0.1 for _, k in res)
    assert record(5, ok, ", ".join(f"p={p}: KS {k:.4f}" for p, k in res) + " (tol 0.1)")


def test_criterion_06_exceedance_poisson():
    alpha = 1.5
    rows = mc.exceedance_experiment(ht.HeavyTailLaw(alpha, 0.5), 10**4, [1.0, 2.0, 4.0], REPS, seed=13)
    parts = []
    ok = True
    for r in rows:
        within = abs(r.mean - r.binomial_mean) <= 3 * r.se
        ok &= within
        parts.append(f"y={r.y:g}: mean {r.mean:.4f} vs {r.binomial_mean:.4f} (3se {3 * r.se:.4f})")
    tv = rows[0].tv
    ok &= tv <= 0.05
    parts.append(f"TV(y=1) {tv:.4f}")
    assert record(6, ok, "; ".join(parts))


def test_criterion_07_dominance():
    law = _law(1.5)
    ns = (500, 2000, 8000)
    dom = [mc.dominance_diagnostic(law, scaling.make_power(GAMMA_OPEN), n, REPS, seed=14) for n in ns]
    meds = [d.median_ratio for d in dom]
    frac = [d.single_jump_fraction for d in dom]
    # the median ratio sits at its floor of 1 once the largest jump wins alone,
    # so approach to 1 is read off the non-increasing median together with the
    # growing share of replications where the single largest jump is the maximizer
    trend = all(b <= a for a, b in zip(meds, meds[1:])) and min(meds) >= 1.0
    toward = all(b >= a for a, b in zip(frac, frac[1:]))
    sandwich = [mc.dominance_diagnostic(law, scaling.make_power(1.0), n, 500, seed=15) for n in ns]
    violations = sum(s.sandwich_violations for s in sandwich)
    ok = trend and toward and violations == 0
    detail = (
        f"median ratio {[round(m, 4) for m in meds]}, single-jump fraction {[round(v, 4) for v in frac]}, "
        f"sandwich violations {violations}"
    )
    assert record(7, ok, detail)


def test_criterion_08_boundary_regime():
    r = mc.boundary_experiment(4.0, 0.1, [1000, 4000, 16000], REPS, 16, reference_draws=4000, grid_size=2**14)
    ok = r.ks_decreasing and r.a_n_growth
    detail = (
        f"KS {[round(k, 4) for k in r.ks]} (decreasing: {r.ks_decreasing}), "
        f"a_n medians {[round(m, 3) for m in r.a_n_medians]} (growing: {r.a_n_growth})"
    )
    assert record(8, ok, detail)


def test_criterion_09_detector():
    alpha = 1.5
    law = _law(alpha)
    gamma = cp.default_gamma(alpha)
    s, dur = cp.strong_shift(alpha, N_LARGE, gamma)
    mult = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0]
    rows = cp.power_curve(
        law, gamma, 0.05, N_LARGE, REPS, seed=17, shift_grid=[m * s for m in mult], duration=dur,
        alpha_source=cp.AlphaSource.supplied(alpha),
    )
    null = rows[0].power
    strong = rows[mult.index(1.0)].power
    mono = all(
        b.power >= a.power - 2 * math.hypot(a.se, b.se) for a, b in zip(rows, rows[1:])
    )
    ok = 0.02 <= null <= 0.08 and strong >= 0.9 and mono
    detail = (
        f"gamma {gamma:.3f}, null rate {null:.4f}, power at strong shift {strong:.4f}, "
        f"curve {[(m, round(r.power, 3)) for m, r in zip(mult, rows)]}, monotone {mono}"
    )
    assert record(9, ok, detail)


def test_criterion_10_closed_form_invariants():
    rng = np.random.default_rng(10)
    failures = []

    u = np.linspace(1e-6, 1 - 1e-6, 2001)
    for a in (0.5, 1.5, 4.0):
        back = limits.frechet_cdf(a, limits.frechet_quantile(a, u))
        if np.max(np.abs(back - u)) > 1e-12:
            failures.append(f"frechet round trip a={a}")
        x = np.linspace(0.01, 50, 500)
        if not np.array_equal(limits.frechet_power_cdf(a, 2.0, x), limits.frechet_cdf(a, x) ** 2):
            failures.append(f"frechet_power r=2 a={a}")

    a = 1.5
    draws = limits.frechet_quantile(a, rng.random((2, 10**5)))
    ks = limits.ks_distance(np.sort(np.maximum(draws[0], draws[1])) * 2 ** (-1 / a), lambda t: limits.frechet_cdf(a, t))
    if ks > 0.01:
        failures.append(f"max-stability KS {ks:.4f}")

    f = scaling.make_power(0.4)
    for i, x in enumerate(oracle.random_walk_cases(60, rng, (5, 150))):
        for mode in Mode:
            base = stats.compute(x, mode, f)
            scaled = stats.compute(2.5 * x, mode, f)
            if not np.isclose(scaled.value, 2.5 * base.value, rtol=1e-12, atol=0.0):
                failures.append(f"scale walk {i} {mode.value}")
            if mode in (Mode.T_TILDE, Mode.T, Mode.M_HAT):
                shifted = stats.compute(x + 3.75, mode, f)
                if not np.isclose(shifted.value, base.value, rtol=1e-9, atol=1e-9):
                    failures.append(f"shift walk {i} {mode.value}")

    for g in (f, scaling.make_power(0.5), scaling.make_power(1.0), scaling.make_power_log(0.3, 1.0)):
        rep = scaling.check_membership(g, 10**6)
        if not rep.passed:
            failures.append(f"membership {g.to_json()}")
        if g(1.0) != 1.0:
            failures.append(f"f(1) {g.to_json()}")
    ok = not failures
    assert record(10, ok, f"{len(failures)} failures" + (f": {failures[:5]}" if failures else "")), failures


if __name__ == "__main__":
    wanted = {int(a) for a in sys.argv[1:]}
    tests = sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_"))
    failed = 0
    for name, fn in tests:
        if wanted and int(name.split("_")[2]) not in wanted:
            continue
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
