"""
Closed forms of the worked examples: target FPT transforms, the initial
densities that solve them, their transforms, and FPT CDFs used as Monte Carlo
targets.

Transforms are written with mpmath so that they continue analytically to
negative (and complex) arguments; removable singularities at theta = 0 are
handled by the tanhc/sinhc helpers.
"""

import math
from typing import Sequence

import mpmath
import numpy as np

from reflectfpt.domain import DensityOnInterval, TransformFn
from reflectfpt.errors import FptDomainError

# |z| below which (1 - tanh(z)/z)/z^2 is summed from its Taylor series.
SERIES_SWITCH = mpmath.mpf('1e-4')


def tanhc(z):
    """tanh(z)/z with the removable point z = 0."""
    return mpmath.mpf(1) if z == 0 else mpmath.tanh(z) / z


def sinhc(z):
    """sinh(z)/z with the removable point z = 0."""
    return mpmath.mpf(1) if z == 0 else mpmath.sinh(z) / z


def one_minus_tanhc_over_sq(z):
    """(1 - tanh(z)/z) / z^2, finite at z = 0 (value 1/3)."""
    if abs(z) < SERIES_SWITCH:
        z2 = z * z
        return mpmath.mpf(1) / 3 - 2 * z2 / 15 + 17 * z2 * z2 / 315
    return (1 - mpmath.tanh(z) / z) / (z * z)


def _check_width(width: float) -> None:
    if width <= 0:
        raise FptDomainError(f"interval width must be positive, got {width}")


# ---------------------------------------------------------------------------
# Uniform initial density: FPT transform tanh(L sqrt(2 theta)) / (L sqrt(2 theta))
# ---------------------------------------------------------------------------

def uniform_fhat(width: float = 1.0) -> TransformFn:
    _check_width(width)
    return TransformFn(lambda theta: tanhc(width * mpmath.sqrt(2 * theta)),
                       domain_min=-math.pi ** 2 / (8 * width * width),
                       name=f'uniform_fhat(L={width})')


def uniform_ghat(a: float = 0.0, S: float = 1.0) -> TransformFn:
    _check_width(S - a)

    def func(theta):
        if theta == 0:
            return mpmath.mpf(1)
        return (mpmath.exp(-a * theta) - mpmath.exp(-S * theta)) / ((S - a) * theta)
    return TransformFn(func, domain_min=-math.inf, name=f'uniform_ghat({a}, {S})')


def uniform_density(a: float = 0.0, S: float = 1.0) -> DensityOnInterval:
    _check_width(S - a)
    return DensityOnInterval(a, S, lambda x: 1.0 / (S - a), name='uniform')


def uniform_start_cdf(width: float, t) -> np.ndarray:
    """
    P(tau <= t) for driftless reflected BM started uniformly on an interval of
    the given width below the barrier:
    1 - sum_k 2/((k+1/2)^2 pi^2) exp(-(k+1/2)^2 pi^2 t/(2 L^2)).
    """
    _check_width(width)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.where(np.isposinf(t), 1.0, 0.0)
    active = np.isfinite(t) & (t > 0)
    if not active.any():
        return out
    tt = t[active]
    tail = np.zeros_like(tt)
    k = 0
    while True:
        c = (k + 0.5) ** 2 * math.pi ** 2
        decay = np.exp(-c * tt / (2.0 * width * width))
        tail += 2.0 / c * decay
        # remaining tail is bounded by the integral of 2/c over k
        if decay.max() * 2.0 / (math.pi ** 2 * (k + 0.5)) < 1e-15:
            break
        k += 1
    out[active] = np.clip(1.0 - tail, 0.0, 1.0)
    return out


# ---------------------------------------------------------------------------
# Sine initial density (pi/(2S)) sin(pi x/S) on (0, S)
# ---------------------------------------------------------------------------

def sine_fhat(S: float = 1.0) -> TransformFn:
    _check_width(S)
    pi2 = mpmath.pi ** 2

    def func(theta):
        c = mpmath.cosh(S * mpmath.sqrt(2 * theta))
        return pi2 / 2 * (1 + c) / (c * (2 * theta * S * S + pi2))
    return TransformFn(func, domain_min=-math.pi ** 2 / (8 * S * S), name=f'sine_fhat(S={S})')


def sine_ghat(S: float = 1.0) -> TransformFn:
    _check_width(S)
    pi2 = mpmath.pi ** 2
    return TransformFn(lambda theta: pi2 / 2 * (1 + mpmath.exp(-theta * S)) / (theta ** 2 * S * S + pi2),
                       domain_min=-math.inf, name=f'sine_ghat(S={S})')


def sine_density(S: float = 1.0) -> DensityOnInterval:
    _check_width(S)
    return DensityOnInterval(0.0, S, lambda x: math.pi / (2 * S) * math.sin(math.pi * x / S), name='sine')


# ---------------------------------------------------------------------------
# Triangular density on [0, 1]: 4x on [0, 1/2], 4(1 - x) on (1/2, 1]
# ---------------------------------------------------------------------------

def triangular_fhat() -> TransformFn:
    def func(theta):
        if theta == 0:
            return mpmath.mpf(1)
        e = mpmath.exp(mpmath.sqrt(2 * theta))
        return ((1 + e) * (e - 2 * mpmath.exp(mpmath.sqrt(theta / 2)) + 1)
                / (theta * mpmath.cosh(mpmath.sqrt(2 * theta)) * e))
    return TransformFn(func, domain_min=-math.pi ** 2 / 8, name='triangular_fhat')


def triangular_ghat() -> TransformFn:
    def func(theta):
        if theta == 0:
            return mpmath.mpf(1)
        return 4 / theta ** 2 * (1 - mpmath.exp(-theta / 2)) ** 2
    return TransformFn(func, domain_min=-math.inf, name='triangular_ghat')


def triangular_density() -> DensityOnInterval:
    return DensityOnInterval(0.0, 1.0, lambda x: 4 * x if x <= 0.5 else 4 * (1 - x), name='triangular')


# ---------------------------------------------------------------------------
# Beta(2, 2) density 6x(1 - x) on [0, 1]
# ---------------------------------------------------------------------------

def beta_fhat() -> TransformFn:
    def func(theta):
        if theta == 0:
            return mpmath.mpf(1)
        z = mpmath.sqrt(2 * theta)
        return (3 * (1 + mpmath.exp(z)) * (mpmath.exp(-z) * (z + 2) + z - 2)
                / (theta * z * (mpmath.exp(z) + mpmath.exp(-z))))
    return TransformFn(func, domain_min=-math.pi ** 2 / 8, name='beta_fhat')


def beta_ghat() -> TransformFn:
    def func(theta):
        if theta == 0:
            return mpmath.mpf(1)
        return 6 / theta ** 3 * ((theta + 2) * mpmath.exp(-theta) + theta - 2)
    return TransformFn(func, domain_min=-math.inf, name='beta_ghat')


def beta_density() -> DensityOnInterval:
    return DensityOnInterval(0.0, 1.0, lambda x: 6 * x * (1 - x), name='beta')


# ---------------------------------------------------------------------------
# Catastrophe process with uniform start on (0, S)
# ---------------------------------------------------------------------------

def catastrophe_fhat(lam: float, S: float = 1.0) -> TransformFn:
    """
    [theta tanh(S r)/(S r) + lam] / (lam + theta), r = sqrt(2(lam + theta)).

    Written as T + 2 lam S^2 (1 - tanhc(z))/z^2 with T = tanhc(z), z = S r, which
    stays finite at theta = -lam.
    """
    if lam < 0:
        raise FptDomainError(f"catastrophe rate must be >= 0, got {lam}")
    _check_width(S)

    def func(theta):
        z = S * mpmath.sqrt(2 * (lam + theta))
        return tanhc(z) + 2 * lam * S * S * one_minus_tanhc_over_sq(z)
    return TransformFn(func, domain_min=-lam - math.pi ** 2 / (8 * S * S),
                       name=f'catastrophe_fhat(lam={lam}, S={S})')


def catastrophe_cdf(lam: float, S: float, t) -> np.ndarray:
    """P(min(tau, Exp(lam)) <= t) = 1 - exp(-lam t) (1 - F_uniform(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    survival = 1.0 - uniform_start_cdf(S, t)
    with np.errstate(invalid='ignore'):
        jump_survival = np.where(np.isposinf(t), 0.0, np.exp(-lam * np.maximum(t, 0.0)))
    return np.where(t > 0, 1.0 - jump_survival * survival, 0.0)


# ---------------------------------------------------------------------------
# Other targets
# ---------------------------------------------------------------------------

def gamma_fhat(lam: float, alpha: float = 1.0) -> TransformFn:
    """(lam / (lam + theta))^alpha."""
    if lam <= 0 or alpha <= 0:
        raise FptDomainError(f"gamma parameters must be positive, got lam={lam}, alpha={alpha}")
    return TransformFn(lambda theta: (lam / (lam + theta)) ** alpha, domain_min=-lam,
                       name=f'gamma_fhat(alpha={alpha}, lam={lam})')


def point_mass_fhat() -> TransformFn:
    """tau = 0 almost surely."""
    return TransformFn(lambda theta: mpmath.mpf(1), domain_min=-math.inf, name='point_mass_fhat')


def point_mass_ghat(at: float) -> TransformFn:
    return TransformFn(lambda theta: mpmath.exp(-at * theta), domain_min=-math.inf,
                       name=f'point_mass_ghat({at})')


def rational_fhat(numerator: Sequence[float], denominator: Sequence[float]) -> TransformFn:
    """
    P(theta)/Q(theta) with coefficients in increasing powers, normalized to 1 at 0.

    Args:
        numerator: Coefficients p0, p1, ... of P.
        denominator: Coefficients q0, q1, ... of Q (q0 != 0).
    """
    if not denominator or denominator[0] == 0 or not numerator or numerator[0] == 0:
        raise FptDomainError("rational transform needs nonzero constant terms")
    p = [mpmath.mpf(c) / numerator[0] for c in numerator]
    q = [mpmath.mpf(c) / denominator[0] for c in denominator]
    roots = np.roots(list(reversed([float(c) for c in denominator]))) if len(denominator) > 1 else []
    real_neg = [r.real for r in roots if abs(r.imag) < 1e-12 and r.real <= 0]
    domain_min = max(real_neg) if real_neg else -math.inf
    return TransformFn(lambda theta: mpmath.polyval(p[::-1], theta) / mpmath.polyval(q[::-1], theta),
                       domain_min=domain_min, name='custom_rational')
