"""Command-line entry point.

Every subcommand reads a JSON config, runs one experiment and writes its
outputs atomically into ``--out``, next to a ``manifest.json``.

Seed precedence: ``--seed`` beats the ``MAXINC_SEED`` environment variable,
which beats the config's ``master_seed`` field.

Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 selftest failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import os
import sys
import time

import numpy as np

from maxinc import __version__, changepoint, io, limits, montecarlo, oracle, scaling, stats
from maxinc.heavytail import HeavyTailLaw

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 2, 3, 4

SUBCOMMANDS = ("simulate", "convergence", "pointprocess", "boundary", "detect", "power", "selftest")


class ConfigError(Exception):
    pass


def resolve_seed(flag, config):
    if flag is not None:
        return flag
    env = os.environ.get("MAXINC_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"MAXINC_SEED must be an unsigned integer, got {env!r}") from None
    return int(config.get("master_seed", 0))


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser():
    ap = argparse.ArgumentParser(
        prog="maxinc",
        description="Maximum-increment statistics of heavy-tailed random walks.",
        epilog="Seed precedence: --seed > $MAXINC_SEED > config 'master_seed'. "
        "Exit codes: 0 ok, 2 config error, 3 runtime error, 4 selftest failure.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "one experiment: summary JSON, ECDF CSV and reference-CDF CSV",
        "convergence": "one experiment per n in n_list: KS-versus-n table",
        "pointprocess": "exceedance counts against the Poisson limit",
        "boundary": "sub-critical regime against the simulated Hölder functional",
        "detect": "epidemic change-point test on a CSV series",
        "power": "rejection rate over a shift or duration-exponent grid",
        "selftest": "oracle equivalence and scaling-class checks",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name], description=helps[name])
        p.add_argument("--config", required=name != "selftest", help="JSON config file")
        p.add_argument("--out", default=None, help="output directory (default: current directory)")
        p.add_argument("--seed", type=_u64, default=None, help="master seed (overrides env and config)")
        p.add_argument("--workers", type=_positive, default=1, help="worker processes")
    return ap


# --------------------------------------------------------------------------
# config parsing (ConfigError -> exit 2)
# --------------------------------------------------------------------------


def _load(path):
    try:
        return io.read_json(path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None


def _law(obj):
    if "law" not in obj:
        raise ConfigError("config needs a 'law' object")
    return HeavyTailLaw.from_json(obj["law"])


def _parse(fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        raise ConfigError(msg) from None


def _experiment(cfg, seed):
    obj = dict(cfg, master_seed=seed)
    if "n" not in obj and obj.get("n_list"):
        obj["n"] = obj["n_list"][0]
    return montecarlo.ExperimentConfig.from_json(obj)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _write_summary(out, summary, reference, tag=""):
    io.write_json(os.path.join(out, f"summary{tag}.json"), summary.to_json())
    ecdf = montecarlo.empirical_cdf(summary.values)
    xs, F = ecdf.table()
    io.write_csv(os.path.join(out, f"ecdf{tag}.csv"), ["value", "F_emp"], zip(xs, F))
    io.write_csv(os.path.join(out, f"reference_cdf{tag}.csv"), ["x", "F_ref"], zip(xs, reference.cdf(xs)))


def cmd_simulate(cfg, seed, out, workers):
    config = _parse(_experiment, cfg, seed)
    summary = montecarlo.run_experiment(config, workers)
    _write_summary(out, summary, config.reference)
    return {"ks": summary.ks, "wall_time": summary.wall_time}


def cmd_convergence(cfg, seed, out, workers):
    n_list = cfg.get("n_list")
    if not n_list:
        raise ConfigError("convergence needs a non-empty 'n_list'")
    config = _parse(_experiment, cfg, seed)
    _parse(lambda: [montecarlo.ExperimentConfig.from_json(dict(cfg, master_seed=seed), n=n) for n in n_list])
    summaries = montecarlo.convergence(config, n_list, workers)
    rows = [(s.n, s.ks, s.reps, s.normalizer, float(np.median(s.values))) for s in summaries]
    for s in summaries:
        _write_summary(out, s, config.reference, f"_n{s.n}")
    io.write_csv(os.path.join(out, "convergence.csv"), ["n", "ks", "reps", "normalizer", "median"], rows)
    return {"wall_time": sum(s.wall_time for s in summaries)}


def cmd_pointprocess(cfg, seed, out, workers):
    def parse():
        law = _law(cfg)
        ys = [float(y) for y in cfg.get("y_grid", [1.0, 2.0, 4.0])]
        if any(y <= 0 for y in ys):
            raise ValueError("y_grid values must be positive")
        return law, int(cfg["n"]), ys, int(cfg["reps"])

    law, n, ys, reps = _parse(parse)
    rows = montecarlo.exceedance_experiment(law, n, ys, reps, seed, workers)
    header = ["y", "mean", "var", "poisson_mean", "binomial_mean", "se", "tv"]
    io.write_csv(
        os.path.join(out, "exceedance.csv"),
        header,
        [(r.y, r.mean, r.var, r.poisson_mean, r.binomial_mean, r.se, r.tv) for r in rows],
    )
    return {}


def cmd_boundary(cfg, seed, out, workers):
    def parse():
        alpha, gamma = float(cfg["alpha"]), float(cfg["gamma"])
        n_list = [int(n) for n in cfg["n_list"]]
        if not n_list:
            raise ValueError("n_list must be non-empty")
        if not alpha > 2 or not 0 <= gamma < 0.5 - 1 / alpha:
            raise ValueError(f"boundary needs alpha > 2 and 0 <= gamma < 1/2 - 1/alpha (alpha={alpha}, gamma={gamma})")
        return alpha, gamma, n_list

    alpha, gamma, n_list = _parse(parse)
    rep = montecarlo.boundary_experiment(
        alpha, gamma, n_list, int(cfg.get("reps", 1000)), seed,
        p=float(cfg.get("p", 0.5)),
        reference_draws=int(cfg.get("reference_draws", 2000)),
        grid_size=int(cfg.get("grid_size", 2**12)),
        workers=workers,
    )
    io.write_csv(os.path.join(out, "boundary.csv"), ["n", "ks", "a_n_median"], zip(rep.n_list, rep.ks, rep.a_n_medians))
    io.write_json(
        os.path.join(out, "boundary.json"),
        {"alpha": alpha, "gamma": gamma, "n_list": rep.n_list, "ks": rep.ks, "a_n_medians": rep.a_n_medians,
         "ks_decreasing": rep.ks_decreasing, "a_n_growth": rep.a_n_growth,
         "reference_draws": rep.reference_draws, "grid_size": rep.grid_size},
    )
    return {}


def _config_relative(cfg_path, p):
    return p if os.path.isabs(p) else os.path.join(os.path.dirname(os.path.abspath(cfg_path)), p)


def cmd_detect(cfg, seed, out, workers, cfg_path=None):
    def parse():
        data = io.read_series(_config_relative(cfg_path, cfg["data"]))
        src = changepoint.AlphaSource.from_json(cfg["alpha_source"])
        sided = changepoint.Sided(cfg.get("sided", "two_sided"))
        gamma = cfg.get("gamma")
        return data, src, sided, None if gamma is None else float(gamma), float(cfg.get("level", 0.05))

    try:
        data, src, sided, gamma, level = _parse(parse)
    except FileNotFoundError as exc:
        raise ConfigError(f"data file not found: {exc.filename}") from None
    report = changepoint.detect(data, gamma, level, sided, src)
    io.write_json(os.path.join(out, "report.json"), report.to_json())
    return {"reject": report.reject}


def cmd_power(cfg, seed, out, workers):
    def parse():
        law = _law(cfg)
        kw = {
            "sided": changepoint.Sided(cfg.get("sided", "two_sided")),
            "duration": cfg.get("duration"),
            "shift": cfg.get("shift"),
        }
        if "shift_grid" in cfg:
            kw["shift_grid"] = [float(s) for s in cfg["shift_grid"]]
        if "theta_grid" in cfg:
            kw["theta_grid"] = [float(t) for t in cfg["theta_grid"]]
        if ("shift_grid" in kw) == ("theta_grid" in kw):
            raise ValueError("give exactly one of 'shift_grid' or 'theta_grid'")
        gamma = float(cfg.get("gamma", changepoint.default_gamma(law.alpha)))
        if not gamma > changepoint.gamma_floor(law.alpha):
            raise ValueError(f"gamma={gamma} violates gamma > max(0, 1/2 - 1/alpha)")
        return law, gamma, float(cfg.get("level", 0.05)), int(cfg["n"]), int(cfg["reps"]), kw

    law, gamma, level, n, reps, kw = _parse(parse)
    rows = changepoint.power_curve(law, gamma, level, n, reps, seed, workers=workers, **kw)
    io.write_csv(os.path.join(out, "power.csv"), ["param", "power", "se", "reps"], [(r.param, r.power, r.se, r.reps) for r in rows])
    return {}


def run_selftest(walks=200, seed=0):
    """Kernel-versus-oracle sweep over every scalar mode, plus the scaling-class grid."""
    rng = np.random.default_rng(seed)
    failures = []
    f = scaling.make_power(0.4)
    for i, x in enumerate(oracle.random_walk_cases(walks, rng, (5, 120))):
        walk = stats.prefix_sums(x)
        for mode in stats.Mode:
            if mode is stats.Mode.RANGE:
                continue
            fast = stats.compute(walk, mode, f)
            ref = oracle.brute_force_oracle(walk, mode, f)
            ok = np.isclose(fast.value, ref.value, rtol=1e-9, atol=0.0)
            if ok and (fast.arg_k, fast.arg_ell) != (ref.arg_k, ref.arg_ell):
                # on exact ties roundoff may pick another maximizing window
                ok = np.isclose(stats.window_value(walk, fast, f), ref.value, rtol=1e-9, atol=0.0)
            if not ok:
                failures.append(f"walk {i} mode {mode.value}: {fast.value!r} vs {ref.value!r}")
    for g in (f, scaling.make_power(0.5), scaling.make_power(1.0), scaling.make_power_log(0.3, 1.0)):
        rep = scaling.check_membership(g, 4096)
        if not rep.passed:
            failures.append(f"scaling {g.to_json()}: {rep.failures()}")
    try:
        limits.range_limit_cdf(1.5, 0.5, np.linspace(0.5, 20, 40))
    except ArithmeticError as exc:
        failures.append(str(exc))
    return failures


RUNNERS = {
    "simulate": cmd_simulate,
    "convergence": cmd_convergence,
    "pointprocess": cmd_pointprocess,
    "boundary": cmd_boundary,
    "power": cmd_power,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = args.out or os.getcwd()
    start = dt.datetime.now(dt.timezone.utc)
    t0 = time.perf_counter()
    try:
        if args.command == "selftest":
            seed = resolve_seed(args.seed, _load(args.config) if args.config else {})
            failures = run_selftest(seed=seed)
            for line in failures:
                print(f"FAIL {line}", file=sys.stderr)
            if args.out:
                io.write_json(os.path.join(out, "selftest.json"), {"failures": failures, "passed": not failures})
            print("selftest: " + ("ok" if not failures else f"{len(failures)} failure(s)"))
            return EXIT_OK if not failures else EXIT_SELFTEST
        cfg = _load(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        seed = resolve_seed(args.seed, cfg)
        if args.command == "detect":
            extra = cmd_detect(cfg, seed, out, args.workers, cfg_path=args.config)
        else:
            extra = RUNNERS[args.command](cfg, seed, out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest = {
        "subcommand": args.command,
        "config": os.path.abspath(args.config),
        "out": os.path.abspath(out),
        "master_seed": seed,
        "workers": args.workers,
        "version": __version__,
        "start": start.isoformat(),
        "end": dt.datetime.now(dt.timezone.utc).isoformat(),
        "elapsed_seconds": time.perf_counter() - t0,
    }
    manifest.update({k: v for k, v in extra.items() if k == "wall_time"})
    io.write_json(os.path.join(out, "manifest.json"), manifest)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
