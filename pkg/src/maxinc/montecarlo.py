"""Replicated simulations of the normalized statistics.

Replication ``r`` of an experiment with master seed ``s`` always draws its
jumps from ``SeedStream(s, r)``, and results are stored by replication
index, so the output does not depend on how replications are spread across
worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from maxinc import heavytail, limits, stats
from maxinc.heavytail import Centering, HeavyTailLaw, SeedStream
from maxinc.limits import LimitLaw
from maxinc.scaling import ScalingFunction, make_power
from maxinc.stats import Mode

NORMALIZATIONS = ("a_n", "p_alpha_a_n")


def substream(master_seed, tag):
    """Derive an independent master seed for a named sub-experiment."""
    ss = np.random.SeedSequence([int(master_seed) % 2**64, int(tag)])
    return int(ss.generate_state(1, np.uint64)[0])


def default_reference(mode: Mode, law: HeavyTailLaw) -> LimitLaw:
    a, p = law.alpha, law.p
    if mode is Mode.M_HAT:
        return LimitLaw("frechet_power", alpha=a, r=2.0)
    if mode is Mode.m:
        return LimitLaw("frechet_power", alpha=a, r=(1 - p) / p, reflected=True)
    if mode is Mode.RANGE:
        return LimitLaw("range_convolution", alpha=a, p=p)
    return LimitLaw("frechet", alpha=a)


def default_normalization(mode: Mode) -> str:
    return "p_alpha_a_n" if mode in stats.ONE_SIDED_MODES else "a_n"


@dataclass
class ExperimentConfig:
    law: HeavyTailLaw
    scaling: ScalingFunction
    mode: Mode
    n: int
    reps: int
    master_seed: int = 0
    normalization: str = "a_n"
    reference: LimitLaw | None = None

    def __post_init__(self):
        self.mode = stats.parse_mode(self.mode)
        if self.reps < 100:
            raise ValueError(f"reps must be at least 100, got {self.reps}")
        if self.n < 10:
            raise ValueError(f"n must be at least 10, got {self.n}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if self.normalization == "p_alpha_a_n" and self.mode not in stats.ONE_SIDED_MODES:
            raise ValueError("p_alpha_a_n normalization applies to one-sided modes only")
        if self.law.dim > 1 and self.mode not in (Mode.M_TILDE, Mode.T_TILDE):
            raise ValueError(f"mode {self.mode.value} needs a scalar law")
        if self.reference is None:
            self.reference = default_reference(self.mode, self.law)

    def normalizer(self, n=None):
        a_n = heavytail.norm_quantile(self.law, self.n if n is None else n)
        if self.normalization == "p_alpha_a_n":
            return self.law.p ** (1.0 / self.law.alpha) * a_n
        return a_n

    def to_json(self):
        return {
            "law": self.law.to_json(),
            "scaling": self.scaling.to_json(),
            "mode": self.mode.value,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "normalization": self.normalization,
            "reference": self.reference.to_json(),
        }

    @classmethod
    def from_json(cls, obj, n=None):
        mode = stats.parse_mode(obj["mode"])
        ref = obj.get("reference")
        return cls(
            law=HeavyTailLaw.from_json(obj["law"]),
            scaling=ScalingFunction.from_json(obj["scaling"]),
            mode=mode,
            n=int(obj["n"] if n is None else n),
            reps=int(obj["reps"]),
            master_seed=int(obj.get("master_seed", 0)),
            normalization=obj.get("normalization", default_normalization(mode)),
            reference=LimitLaw.from_json(ref) if ref else None,
        )


@dataclass(eq=False)
class McSummary:
    values: np.ndarray
    ks: float
    n: int
    reps: int
    master_seed: int
    mode: str
    normalizer: float
    reference: dict
    wall_time: float = 0.0

    def __eq__(self, other):
        # equality ignores wall_time, matching the serialized form
        return isinstance(other, McSummary) and self.to_json() == other.to_json()

    def to_json(self):
        # wall_time is kept out so repeated runs serialize to identical bytes
        return {
            "mode": self.mode,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "normalizer": self.normalizer,
            "ks": self.ks,
            "reference": self.reference,
            "values": self.values.tolist(),
        }


class ReplicationError(RuntimeError):
    pass


def _one_replication(config: ExperimentConfig, r: int) -> float:
    try:
        x = heavytail.sample(config.law, config.n, SeedStream(config.master_seed, r))
        return stats.compute(x, config.mode, config.scaling).value
    except Exception as exc:
        raise ReplicationError(f"replication {r} failed: {exc}") from exc


def _chunk(config, indices):
    return [_one_replication(config, r) for r in indices]


def replicate(fn, args, reps, workers=1):
    """Evaluate ``fn(*args, r)`` for ``r in range(reps)``, in replication order."""
    if workers <= 1:
        return [fn(*args, r) for r in range(reps)]
    bounds = np.linspace(0, reps, workers * 4 + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [(fn, args, c) for c in chunks])
        return [v for part in parts for v in part]


def _run_chunk(job):
    fn, args, idx = job
    return [fn(*args, r) for r in idx]


def run_experiment(config: ExperimentConfig, workers=1) -> McSummary:
    start = time.perf_counter()
    raw = np.asarray(replicate(_one_replication, (config,), config.reps, workers))
    norm = config.normalizer()
    values = np.sort(raw / norm)
    ks = limits.ks_distance(values, config.reference.cdf)
    return McSummary(
        values=values,
        ks=ks,
        n=config.n,
        reps=config.reps,
        master_seed=config.master_seed,
        mode=config.mode.value,
        normalizer=norm,
        reference=config.reference.to_json(),
        wall_time=time.perf_counter() - start,
    )


def convergence(config: ExperimentConfig, n_list, workers=1):
    if not n_list:
        raise ValueError("n_list must be non-empty")
    out = []
    for n in n_list:
        cfg = ExperimentConfig(
            config.law, config.scaling, config.mode, int(n), config.reps,
            config.master_seed, config.normalization, config.reference,
        )
        out.append(run_experiment(cfg, workers))
    return out


class ECDF:
    """Right-continuous empirical CDF."""

    def __init__(self, sample):
        x = np.sort(np.asarray(sample, dtype=float))
        if x.size == 0:
            raise ValueError("sample must be non-empty")
        self.x = x

    def __call__(self, t):
        out = np.searchsorted(self.x, t, side="right") / self.x.size
        return out if np.ndim(out) else float(out)

    def table(self):
        """Distinct sample values with the ECDF at each."""
        u, counts = np.unique(self.x, return_counts=True)
        return u, np.cumsum(counts) / self.x.size


def empirical_cdf(sample) -> ECDF:
    return ECDF(sample)


# --------------------------------------------------------------------------
# exceedances
# --------------------------------------------------------------------------


def _exceedance_counts(law, n, thresholds, seed, r):
    x = heavytail.sample(law, n, SeedStream(seed, r))
    norms = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=1)
    return [int(np.count_nonzero(norms > t)) for t in thresholds]


def poisson_tv(counts, lam):
    """Total-variation distance between a count histogram and Poisson(lam)."""
    counts = np.asarray(counts, dtype=int)
    top = int(max(counts.max(initial=0), sps.poisson.ppf(1 - 1e-12, lam))) + 1
    emp = np.bincount(counts, minlength=top + 1)[: top + 1] / counts.size
    pmf = sps.poisson.pmf(np.arange(top + 1), lam)
    tail = max(0.0, 1.0 - pmf.sum())
    return 0.5 * (np.abs(emp - pmf).sum() + tail)


@dataclass
class ExceedanceRow:
    y: float
    mean: float
    var: float
    poisson_mean: float
    binomial_mean: float
    se: float
    tv: float


def exceedance_experiment(law, n, y_grid, reps, seed, workers=1):
    """Counts of ``||X_i|| > y a_n`` per replication, against Poisson(y**-alpha).

    Exceedances are taken on the uncentered law: the radius is exactly
    Pareto there, so ``n P(||X|| > y a_n) = y**-alpha`` whenever ``y a_n >= 1``.
    """
    y_grid = np.asarray(y_grid, dtype=float)
    if np.any(y_grid <= 0):
        raise ValueError("y values must be positive")
    base = law.with_centering(Centering.NONE)
    a_n = heavytail.norm_quantile(base, n)
    thresholds = (y_grid * a_n).tolist()
    counts = np.asarray(replicate(_exceedance_counts, (base, n, thresholds, seed), reps, workers))
    rows = []
    for j, y in enumerate(y_grid):
        c = counts[:, j]
        t = y * a_n
        tail = min(1.0, t ** -law.alpha) if t >= 1 else 1.0
        lam = y ** -law.alpha
        rows.append(
            ExceedanceRow(
                y=float(y),
                mean=float(c.mean()),
                var=float(c.var(ddof=1)),
                poisson_mean=float(lam),
                binomial_mean=float(n * tail),
                se=float(math.sqrt(n * tail * (1 - tail) / reps)),
                tv=float(poisson_tv(c, lam)),
            )
        )
    return rows


# --------------------------------------------------------------------------
# dominance of the single largest jump
# --------------------------------------------------------------------------


def _dominance_one(law, f, n, seed, r):
    x = heavytail.sample(law, n, SeedStream(seed, r))
    norms = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=1)
    s = stats.stat_M_tilde(x, f)
    i = int(np.argmax(norms))
    hit = s.arg_ell == 1 and s.arg_k == i
    return s.value / norms[i], hit, s.value, float(norms[i])


@dataclass
class DominanceSummary:
    n: int
    reps: int
    ratio_quantiles: dict
    median_ratio: float
    min_ratio: float
    max_ratio: float
    single_jump_fraction: float
    sandwich_violations: int


def dominance_diagnostic(law, f, n, reps, seed, workers=1) -> DominanceSummary:
    """Ratio of ``M_tilde`` to the largest jump norm.

    The ratio is at least one in every replication (length-one windows), and
    for exponents >= 1 it cannot exceed one either; both are counted.
    """
    floor = max(0.0, 0.5 - 1.0 / law.alpha)
    if not f.gamma > floor:
        raise ValueError(f"dominance needs gamma > max(0, 1/2 - 1/alpha) = {floor:.4g}")
    out = replicate(_dominance_one, (law, f, n, seed), reps, workers)
    ratio = np.array([o[0] for o in out])
    hits = np.array([o[1] for o in out])
    violations = int(np.sum([o[2] < o[3] for o in out]))
    if f.exponent >= 1:
        violations += int(np.sum([o[2] > o[3] * (1 + 1e-12) for o in out]))
    qs = (0.1, 0.25, 0.5, 0.75, 0.9)
    return DominanceSummary(
        n=n,
        reps=reps,
        ratio_quantiles={q: float(np.quantile(ratio, q)) for q in qs},
        median_ratio=float(np.median(ratio)),
        min_ratio=float(ratio.min()),
        max_ratio=float(ratio.max()),
        single_jump_fraction=float(hits.mean()),
        sandwich_violations=violations,
    )


# --------------------------------------------------------------------------
# sub-critical (Wiener functional) regime
# --------------------------------------------------------------------------


def _boundary_one(law, f, n, seed, r):
    x = heavytail.sample(law, n, SeedStream(seed, r))
    return stats.stat_M_tilde(x, f).value


def _holder_one(gamma, grid, sigma, seed, r):
    return limits.simulate_holder_functional(gamma, grid, SeedStream(seed, r), sigma)


@dataclass
class BoundaryReport:
    alpha: float
    gamma: float
    n_list: list
    ks: list
    a_n_medians: list
    ks_decreasing: bool
    a_n_growth: bool
    reference_draws: int
    grid_size: int
    reference: np.ndarray = field(repr=False, default=None)


def boundary_experiment(alpha, gamma, n_list, reps, seed, *, p=0.5, reference_draws=2000,
                        grid_size=2**12, workers=1) -> BoundaryReport:
    """Compare ``n**(gamma - 1/2) M_tilde`` with ``sigma * R_W`` below the Fréchet threshold."""
    if not alpha > 2:
        raise ValueError("the Wiener regime needs alpha > 2 (finite variance)")
    if not 0 <= gamma < 0.5 - 1.0 / alpha:
        raise ValueError(f"gamma must lie in [0, {0.5 - 1.0 / alpha:.4g}) for alpha={alpha}")
    law = HeavyTailLaw(alpha, p, centering=Centering.ANALYTIC_MEAN)
    sigma = math.sqrt(law.variance())
    f = make_power(gamma)
    ref = np.asarray(
        replicate(_holder_one, (gamma, grid_size, sigma, substream(seed, 1)), reference_draws, workers)
    )
    ks, meds = [], []
    for n in n_list:
        vals = np.asarray(replicate(_boundary_one, (law, f, int(n), seed), reps, workers))
        ks.append(limits.ks_two_sample(vals * n ** (gamma - 0.5), ref))
        meds.append(float(np.median(vals / heavytail.norm_quantile(law, n))))
    return BoundaryReport(
        alpha=alpha,
        gamma=gamma,
        n_list=[int(n) for n in n_list],
        ks=ks,
        a_n_medians=meds,
        ks_decreasing=all(b < a for a, b in zip(ks, ks[1:])),
        a_n_growth=all(b > a for a, b in zip(meds, meds[1:])),
        reference_draws=reference_draws,
        grid_size=grid_size,
        reference=ref,
    )


# --------------------------------------------------------------------------
# joint one-sided law
# --------------------------------------------------------------------------


def _pair_one(law, f, n, seed, r):
    x = heavytail.sample(law, n, SeedStream(seed, r))
    lo, hi = stats.stat_one_sided(x, f)
    return lo.value, hi.value


@dataclass
class JointReport:
    xs: np.ndarray
    ys: np.ndarray
    empirical: np.ndarray
    closed_form: np.ndarray
    product_of_marginals: np.ndarray
    b_n: float
    m_values: np.ndarray = field(repr=False, default=None)
    M_values: np.ndarray = field(repr=False, default=None)

    @property
    def max_error(self):
        return float(np.max(np.abs(self.empirical - self.closed_form)))

    @property
    def max_dependence(self):
        return float(np.max(np.abs(self.empirical - self.product_of_marginals)))


def joint_one_sided_experiment(law, f, n, reps, xs, ys, seed, workers=1) -> JointReport:
    """Empirical ``P(m/b_n <= -x, M/b_n <= y)`` on the grid ``xs`` x ``ys``."""
    if law.dim != 1:
        raise ValueError("the one-sided experiment needs a scalar law")
    pairs = np.asarray(replicate(_pair_one, (law, f, n, seed), reps, workers))
    b_n = law.p ** (1.0 / law.alpha) * heavytail.norm_quantile(law, n)
    m = pairs[:, 0] / b_n
    M = pairs[:, 1] / b_n
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    emp = np.empty((xs.size, ys.size))
    prod = np.empty_like(emp)
    closed = np.empty_like(emp)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            a = m <= -x
            b = M <= y
            emp[i, j] = np.mean(a & b)
            prod[i, j] = a.mean() * b.mean()
            closed[i, j] = limits.joint_one_sided_cdf(law.alpha, law.p, x, y)
    return JointReport(xs, ys, emp, closed, prod, b_n, m, M)


def median_trend(values_by_n):
    meds = [float(np.median(v)) for v in values_by_n]
    return meds, all(b < a for a, b in zip(meds, meds[1:]))
