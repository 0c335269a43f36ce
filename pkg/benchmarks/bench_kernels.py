"""Numba kernels against their numpy twins.

Times each statistic on heavy-tailed walks for both backends and checks
that the two return the same (value, window). Usage::

    python benchmarks/bench_kernels.py [--sizes 1000 4000 16000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from maxinc import _accel, heavytail, stats
from maxinc.scaling import make_power
from maxinc.stats import Mode

MODES = (Mode.M_TILDE, Mode.T_TILDE, Mode.M, Mode.T, Mode.M_HAT)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--gamma", type=float, default=0.5)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy backend can run")
        return 1
    law = heavytail.HeavyTailLaw(args.alpha, centering="analytic_mean")
    f = make_power(args.gamma)

    # compile outside the timed region
    warm = heavytail.sample(law, 64, heavytail.SeedStream(0))
    for mode in MODES:
        stats.compute(warm, mode, f, backend="numba")

    print(f"{'mode':>8} {'n':>7} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8}  same")
    for n in args.sizes:
        x = heavytail.sample(law, n, heavytail.SeedStream(1))
        walk = stats.prefix_sums(x)
        for mode in MODES:
            t_np, r_np = best_time(lambda: stats.compute(walk, mode, f, backend="numpy"), args.repeat)
            t_nb, r_nb = best_time(lambda: stats.compute(walk, mode, f, backend="numba"), args.repeat)
            same = (r_np.value, r_np.arg_k, r_np.arg_ell) == (r_nb.value, r_nb.arg_k, r_nb.arg_ell)
            print(f"{mode.value:>8} {n:>7} {t_np:>11.5f} {t_nb:>11.5f} {t_np / t_nb:>8.1f}  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
