"""
Monte Carlo oracle: reflected SDE paths and first-passage samples.

Paths are advanced with Euler-Maruyama and folded back into the interval.
FPT sampling is vectorized over batches of paths; batch i draws from the i-th
child of SeedSequence(seed), so serial and multiprocessing runs give
identical samples.
"""

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from reflectfpt import analytic_bm, bvp_engine
from reflectfpt.domain import BOUNDS_TOL, DiffusionSpec
from reflectfpt.errors import CensoringWarning, FptDomainError, ReflectFptError

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-4
DEFAULT_PATHS = 10_000
DEFAULT_BATCH_SIZE = 8192
# Censored fraction above this triggers CensoringWarning (and blocks ks_statistic).
CENSOR_TOL = 1e-3
# Default horizon in units of the mean FPT from the lowest start.
HORIZON_FACTOR = 50.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = DEFAULT_DT
    horizon: Optional[float] = None
    n_paths: int = DEFAULT_PATHS
    seed: int = 0
    batch_size: int = DEFAULT_BATCH_SIZE
    workers: int = 1
    bridge: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise FptDomainError(f"dt must be positive, got {self.dt}")
        if self.horizon is not None and self.horizon < self.dt:
            raise FptDomainError(f"horizon {self.horizon} is shorter than dt {self.dt}")
        if self.n_paths < 1 or self.batch_size < 1 or self.workers < 1:
            raise FptDomainError("n_paths, batch_size and workers must be >= 1")
        if self.seed < 0:
            raise FptDomainError(f"seed must be nonnegative, got {self.seed}")


@dataclass
class FptSampleSet:
    """One FPT per path; censored paths hold +inf."""

    times: np.ndarray
    censored_count: int
    config: SimConfig
    description: str = ''

    @property
    def n_paths(self) -> int:
        return int(self.times.size)

    @property
    def crossed(self) -> np.ndarray:
        return self.times[np.isfinite(self.times)]

    @property
    def censored_fraction(self) -> float:
        return self.censored_count / self.n_paths

    def mean(self) -> float:
        return float(np.mean(self.crossed))

    def variance(self) -> float:
        return float(np.var(self.crossed, ddof=1))

    def std_error(self) -> float:
        return math.sqrt(self.variance() / self.crossed.size)


@dataclass
class ReflectedPath:
    """States on the time grid and the regulator pushes applied at a and b."""

    times: np.ndarray
    states: np.ndarray
    lower_push: np.ndarray = field(repr=False)
    upper_push: np.ndarray = field(repr=False)


def _fold(y: float, a: float, b: float):
    """Reflect y into [a, b] (iterated); returns (state, push at a, push at b)."""
    lower = upper = 0.0
    while y < a or y > b:
        if y < a:
            lower += 2 * (a - y)
            y = 2 * a - y
        else:
            upper += 2 * (y - b)
            y = 2 * b - y
    return y, lower, upper


def simulate_reflected_path(spec: DiffusionSpec, x0: float, cfg: SimConfig,
                            increments: Optional[np.ndarray] = None) -> ReflectedPath:
    """
    One Euler-Maruyama path folded into [a, b].

    Args:
        spec: Diffusion coefficients and reflecting boundaries.
        x0: Start, a <= x0 <= b.
        cfg: dt and horizon (the horizon is required); seed when no increments are given.
        increments: Brownian increments dB to drive the path (length = steps).

    Returns:
        ReflectedPath with states[k] at times[k] = k dt; x0 + sum(drift + sigma dB)
        plus lower_push minus upper_push reproduces states exactly.
    """
    if not spec.a - BOUNDS_TOL <= x0 <= spec.b + BOUNDS_TOL:
        raise FptDomainError(f"start {x0} outside [{spec.a}, {spec.b}]")
    if increments is None:
        if cfg.horizon is None:
            raise FptDomainError("simulate_reflected_path needs a horizon or explicit increments")
        n_steps = int(math.ceil(cfg.horizon / cfg.dt))
        increments = np.random.default_rng(cfg.seed).standard_normal(n_steps) * math.sqrt(cfg.dt)
    increments = np.asarray(increments, dtype=float)
    n_steps = increments.size

    states = np.empty(n_steps + 1)
    lower = np.zeros(n_steps + 1)
    upper = np.zeros(n_steps + 1)
    states[0] = x = min(max(x0, spec.a), spec.b)
    for k in range(n_steps):
        y = x + float(spec.mu(x)) * cfg.dt + float(spec.sigma(x)) * increments[k]
        x, dl, du = _fold(y, spec.a, spec.b)
        states[k + 1] = x
        lower[k + 1] = dl
        upper[k + 1] = du
    return ReflectedPath(np.arange(n_steps + 1) * cfg.dt, states, lower, upper)


def skorokhod_reflect(x0: float, increments: np.ndarray, a: float) -> np.ndarray:
    """Exact one-sided Skorokhod map at a of the discrete path x0 + cumsum(increments)."""
    y = x0 + np.concatenate(([0.0], np.cumsum(increments)))
    return y + np.maximum(0.0, np.maximum.accumulate(a - y))


def _check_init(init, spec: DiffusionSpec, S: float) -> None:
    lo, hi = init.support
    if lo < spec.a - BOUNDS_TOL or hi > S + BOUNDS_TOL:
        raise FptDomainError(f"initial law on [{lo}, {hi}] is not inside [a, S] = [{spec.a}, {S}]")
    if S > spec.b + BOUNDS_TOL:
        raise FptDomainError(f"barrier {S} lies above b = {spec.b}")


def default_horizon(spec: DiffusionSpec, S: float, x_low: float) -> float:
    """HORIZON_FACTOR times the mean FPT from the lowest starting point."""
    bm = spec.as_bm()
    if bm is not None:
        mean = analytic_bm.mean_fpt(bm, x_low, S)
    else:
        mean = bvp_engine.moments_via_bvp(spec, S, 1, x_low)
    return HORIZON_FACTOR * max(mean, 1e-6)


def _simulate_batch(args) -> np.ndarray:
    """FPTs of one batch; module-level so Pool can pickle it."""
    spec, init, S, dt, horizon, bridge, lam, seed_seq, n = args
    rng = np.random.default_rng(seed_seq)
    x = np.asarray(init.sample(rng, n), dtype=float)
    clock = rng.exponential(1.0 / lam, size=n) if lam > 0 else None
    times = np.full(n, np.inf)
    started_above = x >= S
    times[started_above] = 0.0

    idx = np.flatnonzero(~started_above)
    xs = x[idx]
    a = spec.a
    sqdt = math.sqrt(dt)
    n_steps = int(math.ceil(horizon / dt - 1e-9))
    for step in range(n_steps):
        if idx.size == 0:
            break
        t0 = step * dt
        sigma = spec.sigma(xs) * np.ones_like(xs)
        y = xs + spec.mu(xs) * dt + sigma * sqdt * rng.standard_normal(idx.size)
        reflected = y < a
        y = np.where(reflected, 2 * a - y, y)

        hit = y >= S
        if hit.any():
            frac = (S - xs[hit]) / (y[hit] - xs[hit])
            times[idx[hit]] = t0 + dt * frac
        done = hit
        if bridge:
            # the bridge law holds for unreflected steps only
            miss = np.flatnonzero(~hit & ~reflected)
            var = sigma[miss] ** 2 * dt
            with np.errstate(divide='ignore', invalid='ignore'):
                p = np.where(var > 0, np.exp(-2 * (S - xs[miss]) * (S - y[miss]) / var), 0.0)
            crossed = rng.uniform(size=miss.size) < p
            times[idx[miss[crossed]]] = t0 + 0.5 * dt
            done = done.copy()
            done[miss[crossed]] = True
        if clock is not None:
            # the clock rang first; min(tau, clock) is settled
            done = done | (clock[idx] <= t0 + dt)
        keep = ~done
        idx = idx[keep]
        xs = y[keep]

    if clock is not None:
        # a clock ringing after the horizon leaves the path censored
        rang = clock <= horizon
        times[rang] = np.minimum(times[rang], clock[rang])
    times[times > horizon] = np.inf
    return times


def _sample(spec: DiffusionSpec, init, S: float, cfg: SimConfig, lam: float,
            description: str) -> FptSampleSet:
    _check_init(init, spec, S)
    horizon = cfg.horizon
    if horizon is None:
        horizon = default_horizon(spec, S, init.support[0])
        logger.info(f"horizon defaulted to {horizon:.4g}")
    n_batches = int(math.ceil(cfg.n_paths / cfg.batch_size))
    children = np.random.SeedSequence(cfg.seed).spawn(n_batches)
    jobs = []
    for i, child in enumerate(children):
        n = min(cfg.batch_size, cfg.n_paths - i * cfg.batch_size)
        jobs.append((spec, init, S, cfg.dt, horizon, cfg.bridge, lam, child, n))

    if cfg.workers > 1 and n_batches > 1:
        logger.info(f"Simulating {n_batches} batches with {cfg.workers} workers")
        with Pool(cfg.workers) as pool:
            parts = pool.map(_simulate_batch, jobs)
    else:
        parts = []
        for i, job in enumerate(jobs, 1):
            logger.info(f"[{i}/{n_batches}] Processing batch of {job[-1]} paths...")
            parts.append(_simulate_batch(job))

    times = np.concatenate(parts)
    censored = int(np.sum(~np.isfinite(times)))
    samples = FptSampleSet(times, censored, cfg, description)
    if samples.censored_fraction > CENSOR_TOL:
        message = (f"{censored}/{cfg.n_paths} paths censored at horizon {horizon:.4g} "
                   f"({description or 'fpt sample'})")
        warnings.warn(message, CensoringWarning, stacklevel=3)
        logger.warning(message)
    return samples


def sample_fpt(spec: DiffusionSpec, init, S: float, cfg: SimConfig) -> FptSampleSet:
    """
    First-passage times through S from below for initial positions drawn from init.

    Crossings inside a step are placed by linear interpolation; with cfg.bridge
    an unreflected step ending below S still crosses with the Brownian-bridge probability
    exp(-2 (S - x0)(S - x1) / (sigma^2 dt)). Starts at or above S give tau = 0.
    """
    return _sample(spec, init, S, cfg, 0.0, f'fpt({spec.name}, S={S})')


def sample_fpt_with_catastrophe(lam: float, spec: DiffusionSpec, init, S: float,
                                cfg: SimConfig) -> FptSampleSet:
    """min(tau_S, T) with T ~ Exponential(lam) independent of the path."""
    if lam <= 0:
        raise FptDomainError(f"catastrophe rate must be positive, got {lam}")
    return _sample(spec, init, S, cfg, float(lam), f'fpt_catastrophe({spec.name}, S={S}, lam={lam})')


def ks_statistic(samples: Union[FptSampleSet, Sequence[float]],
                 target_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    sup |F_n - F| between the empirical CDF and a vectorized target CDF.

    The left limit F(x-) is used on the lower side, so atoms in the target
    (e.g. tau = 0) are handled exactly. Censored (+inf) samples count in n.
    """
    if isinstance(samples, FptSampleSet):
        if samples.censored_fraction > CENSOR_TOL:
            raise ReflectFptError(
                f"{samples.censored_fraction:.2%} of samples censored; extend the horizon"
            )
        times = samples.times
    else:
        times = np.asarray(samples, dtype=float)
    x = np.sort(times)
    n = x.size
    finite = x[np.isfinite(x)]
    if finite.size == 0:
        return 1.0
    i = np.arange(1, finite.size + 1)
    cdf = np.asarray(target_cdf(finite), dtype=float)
    cdf_left = np.asarray(target_cdf(np.nextafter(finite, -np.inf)), dtype=float)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf_left - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def samples_to_csv(samples: FptSampleSet, path: Union[str, Path],
                   header: Optional[Sequence[str]] = None) -> Path:
    """Write path_index, fpt, censored rows (17 significant digits) after '# ' header lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        for line in header or ():
            f.write(f"# {line}\n")
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['path_index', 'fpt', 'censored'])
        for i, t in enumerate(samples.times):
            censored = not math.isfinite(t)
            writer.writerow([i, 'inf' if censored else f"{t:.17g}", int(censored)])
    return path
