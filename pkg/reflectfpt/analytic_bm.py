"""
Closed forms for the first-passage time from below of Brownian motion with
drift mu, reflected at a: Laplace transform, driftless spectral density and
CDF, and the first two moments.

The Laplace transform is evaluated in a factored form whose stored
exponentials all have nonpositive arguments, and in log space, so it never
overflows. Moments are evaluated in extended precision because their 1/mu^4
terms cancel catastrophically in double precision.
"""

import logging
import math
import warnings
from typing import Tuple

import mpmath
import numpy as np

from reflectfpt.domain import ReflectedBmSpec, TransformFn, check_ordered
from reflectfpt.errors import FptDomainError, RangeGuardError, SeriesConvergenceWarning

logger = logging.getLogger(__name__)

# |mu| * max(S - a, S - x, 1) below this switches to the driftless formulas.
SMALL_DRIFT_THRESHOLD = 1e-7
SERIES_REL_TOL = 1e-14
SERIES_MAX_TERMS = 10_000
# Below MIN_SERIES_TIME * S**2 the spectral series is not trusted.
MIN_SERIES_TIME = 1e-6
MOMENT_DPS = 60
# Smallest log-value representable as a normal double.
LOG_FLOAT_MIN = -745.0


def is_small_drift(spec: ReflectedBmSpec, x: float, S: float) -> bool:
    return abs(spec.mu) * max(S - spec.a, S - x, 1.0) < SMALL_DRIFT_THRESHOLD


def _log_laplace(mu, a, x, S, theta, lib):
    """
    log E[exp(-theta tau_S(x))] with `lib` = math or mpmath.

    For mu >= 0:  -(S-x)(k-mu) + log1p(rho e^{-2k(x-a)}) - log1p(rho e^{-2k(S-a)}),
    rho = (k-mu)/(k+mu), k = sqrt(mu^2 + 2 theta); k - mu is formed as 2 theta/(k + mu).
    For mu < 0 the bracket is rewritten with r = 1/rho = (k+mu)/(k-mu).
    """
    k = lib.sqrt(mu * mu + 2 * theta)
    if mu >= 0:
        k_minus_mu = 2 * theta / (k + mu)
        rho = k_minus_mu / (k + mu)
        return (-(S - x) * k_minus_mu
                + lib.log1p(rho * lib.exp(-2 * k * (x - a)))
                - lib.log1p(rho * lib.exp(-2 * k * (S - a))))
    k_minus_mu = k - mu
    r = (2 * theta / k_minus_mu) / k_minus_mu
    return (-(S - x) * k_minus_mu
            + lib.log(lib.exp(-2 * k * (x - a)) + r)
            - lib.log(lib.exp(-2 * k * (S - a)) + r))


def _log_laplace_driftless(a, x, S, theta, lib):
    """log cosh((x-a) sqrt(2 theta)) - log cosh((S-a) sqrt(2 theta)), overflow-free."""
    k = lib.sqrt(2 * theta)
    return (-(S - x) * k
            + lib.log1p(lib.exp(-2 * k * (x - a)))
            - lib.log1p(lib.exp(-2 * k * (S - a))))


def log_laplace_fpt_below(spec: ReflectedBmSpec, x: float, S: float, theta: float) -> float:
    """
    log E[exp(-theta tau_S(x))] for reflected drifted BM.

    Args:
        spec: Drift and boundaries.
        x: Starting point, a <= x <= S.
        S: Barrier, S <= b.
        theta: Transform variable, theta >= 0.

    Returns:
        The log-transform (0 at theta = 0 or x = S).
    """
    spec.check_query(x, S)
    if theta < 0:
        raise FptDomainError(f"theta must be >= 0, got {theta}")
    if theta == 0 or x == S:
        return 0.0
    if is_small_drift(spec, x, S):
        return float(_log_laplace_driftless(spec.a, x, S, theta, math))
    return float(_log_laplace(spec.mu, spec.a, x, S, theta, math))


def laplace_fpt_below(spec: ReflectedBmSpec, x: float, S: float, theta: float) -> float:
    """
    E[exp(-theta tau_S(x))] for BM with drift mu reflected at a.

    Raises:
        RangeGuardError: if the value underflows double precision.
    """
    log_value = log_laplace_fpt_below(spec, x, S, theta)
    if log_value < LOG_FLOAT_MIN:
        raise RangeGuardError(
            f"Laplace transform underflows: log value {log_value:.1f} at theta={theta}; "
            "use log_laplace_fpt_below"
        )
    return math.exp(log_value)


def large_gap_laplace(mu: float, x: float, S: float, theta: float) -> float:
    """Unreflected hitting transform exp(-(S-x)(sqrt(mu^2+2 theta) - mu)), the a -> -inf limit."""
    if x > S or theta < 0:
        raise FptDomainError(f"need x <= S and theta >= 0, got x={x}, S={S}, theta={theta}")
    k = math.sqrt(mu * mu + 2 * theta)
    k_minus_mu = 2 * theta / (k + mu) if mu >= 0 else k - mu
    return math.exp(-(S - x) * k_minus_mu)


def laplace_transform_fn(spec: ReflectedBmSpec, x: float, S: float) -> TransformFn:
    """theta -> laplace_fpt_below as a precise TransformFn (finite for theta > -mu^2/2)."""
    spec.check_query(x, S)
    mu, a = spec.mu, spec.a
    small = is_small_drift(spec, x, S)

    def func(theta):
        if theta == 0 or x == S:
            return mpmath.mpf(1)
        if small:
            return mpmath.exp(_log_laplace_driftless(a, x, S, theta, mpmath))
        return mpmath.exp(_log_laplace(mu, a, x, S, theta, mpmath))

    return TransformFn(func, domain_min=-0.5 * mu * mu, precise=True,
                       name=f'fpt_below(mu={mu}, a={a}, x={x}, S={S})')


def _spectral_rates(S: float, k: np.ndarray) -> np.ndarray:
    return (k + 0.5) ** 2 * math.pi ** 2 / (2.0 * S * S)


def spectral_density(x: float, S: float, t: float) -> float:
    """
    FPT density of driftless BM reflected at 0, started at x, barrier S.

    (pi/S^2) sum_k (-1)^k (k+1/2) cos((k+1/2) pi x/S) exp(-(k+1/2)^2 pi^2 t/(2 S^2)),
    truncated when the next term drops below SERIES_REL_TOL * (|sum| + 1).

    Returns:
        The density value, or nan (with SeriesConvergenceWarning) when t is too
        small for the truncated series.
    """
    check_ordered(0.0, x, S, names='0 <= x <= S')
    if S <= 0 or t <= 0:
        raise FptDomainError(f"need S > 0 and t > 0, got S={S}, t={t}")
    if t < MIN_SERIES_TIME * S * S:
        warnings.warn(f"spectral series not converged at t={t:g} (< {MIN_SERIES_TIME:g} S^2)",
                      SeriesConvergenceWarning, stacklevel=2)
        return math.nan
    k = np.arange(SERIES_MAX_TERMS, dtype=float)
    # the envelope, not the term, decides truncation: cos() can vanish at single k
    envelope = (k + 0.5) * np.exp(-_spectral_rates(S, k) * t) * math.pi / (S * S)
    terms = (-1.0) ** k * np.cos((k + 0.5) * math.pi * x / S) * envelope
    partial = np.cumsum(terms)
    small = envelope[1:] < SERIES_REL_TOL * (np.abs(partial[:-1]) + 1.0)
    if not small.any():
        warnings.warn(f"spectral series hit {SERIES_MAX_TERMS} terms at t={t:g}",
                      SeriesConvergenceWarning, stacklevel=2)
        return float(partial[-1])
    return float(partial[int(np.argmax(small))])


def spectral_cdf(x: float, S: float, t) -> np.ndarray:
    """
    P(tau_S(x) <= t) for driftless BM reflected at 0 (vectorized in t).

    1 - sum_k (-1)^k 2/((k+1/2) pi) cos((k+1/2) pi x/S) exp(-(k+1/2)^2 pi^2 t/(2 S^2)).
    Infinite t maps to 1; t <= 0 maps to 0 (or 1 when x = S).
    """
    check_ordered(0.0, x, S, names='0 <= x <= S')
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    if x == S:
        out[:] = np.where(t >= 0, 1.0, 0.0)
        return out
    out[np.isposinf(t)] = 1.0
    active = np.isfinite(t) & (t > 0)
    if not active.any():
        return out
    tt = t[active]
    tail = np.zeros_like(tt)
    for k in range(SERIES_MAX_TERMS * 10):
        rate = (k + 0.5) ** 2 * math.pi ** 2 / (2.0 * S * S)
        decay = np.exp(-rate * tt)
        coef = (-1) ** k * 2.0 / ((k + 0.5) * math.pi) * math.cos((k + 0.5) * math.pi * x / S)
        tail += coef * decay
        if decay.max() < 1e-17:
            break
    out[active] = np.clip(1.0 - tail, 0.0, 1.0)
    return out


def _mean_driftless(a, x, S):
    return -x * x + 2 * a * x + S * (S - 2 * a)


def _second_moment_driftless(a, x, S):
    # T2 = x^4/3 - (4/3) a x^3 - 2 S (S - 2a) x^2 + A x + B with T2'(a) = 0 and T2(S) = 0.
    A = 4 * a * S * S - 8 * a * a * S + (8 * a ** 3) / 3
    B = -(S ** 4 / 3 - (4 * a / 3) * S ** 3 - 2 * S * (S - 2 * a) * S ** 2 + A * S)
    return x ** 4 / 3 - (4 * a / 3) * x ** 3 - 2 * S * (S - 2 * a) * x ** 2 + A * x + B


def _mean_drifted(mu, a, x, S):
    return (mpmath.exp(2 * mu * (a - S)) - mpmath.exp(2 * mu * (a - x))) / (2 * mu * mu) + (S - x) / mu


def _second_moment_drifted(mu, a, x, S):
    e = mpmath.exp
    c2 = e(2 * mu * a) / (2 * mu ** 4) * (4 * a * mu - e(2 * mu * (a - S)) - 2 - 2 * S * mu)
    c1 = -c2 * e(-2 * mu * S) + S / mu ** 3 * (2 * e(2 * mu * (a - S)) + 1 + S * mu)
    return (x * x / mu ** 2
            - x / mu ** 3 * (e(2 * mu * (a - S)) + 1 + 2 * S * mu + e(2 * mu * (a - x)))
            + c1 + c2 * e(-2 * mu * x))


def mean_fpt(spec: ReflectedBmSpec, x: float, S: float) -> float:
    """E[tau_S(x)]; the driftless form -x^2 + 2ax + S(S - 2a) under the small-drift switch."""
    spec.check_query(x, S)
    if x == S:
        return 0.0
    if is_small_drift(spec, x, S):
        return float(_mean_driftless(spec.a, x, S))
    with mpmath.workdps(MOMENT_DPS):
        mu, a, xm, Sm = (mpmath.mpf(v) for v in (spec.mu, spec.a, x, S))
        return float(_mean_drifted(mu, a, xm, Sm))


def second_moment_fpt(spec: ReflectedBmSpec, x: float, S: float) -> float:
    """E[tau_S(x)^2]."""
    spec.check_query(x, S)
    if x == S:
        return 0.0
    if is_small_drift(spec, x, S):
        with mpmath.workdps(MOMENT_DPS):
            return float(_second_moment_driftless(*(mpmath.mpf(v) for v in (spec.a, x, S))))
    with mpmath.workdps(MOMENT_DPS):
        mu, a, xm, Sm = (mpmath.mpf(v) for v in (spec.mu, spec.a, x, S))
        return float(_second_moment_drifted(mu, a, xm, Sm))


def fpt_moment_pair(spec: ReflectedBmSpec, x: float, S: float) -> Tuple[float, float]:
    """(mean, variance) of tau_S(x); the variance is clipped at 0 against rounding."""
    mean = mean_fpt(spec, x, S)
    second = second_moment_fpt(spec, x, S)
    return mean, max(second - mean * mean, 0.0)
