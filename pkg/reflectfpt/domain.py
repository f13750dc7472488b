"""
Shared domain types: reflected-BM geometry, Laplace transforms, densities on
intervals, general diffusion coefficients and initial-position samplers.

Coefficient and sampler classes are plain picklable objects so that they can
cross `multiprocessing.Pool` boundaries unchanged.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy import integrate

from reflectfpt.errors import FptDomainError, QuadratureError

# Precision used when a precise transform is evaluated to a plain float.
DEFAULT_FLOAT_DPS = 30

# Absolute tolerance on the bounds checks a <= x <= S <= b.
BOUNDS_TOL = 1e-12


def check_ordered(*values: float, names: str = '') -> None:
    """Raise FptDomainError unless values are nondecreasing (within BOUNDS_TOL)."""
    for lo, hi in zip(values, values[1:]):
        if lo > hi + BOUNDS_TOL:
            raise FptDomainError(f"expected {names or 'ordered values'}, got {values}")


@dataclass(frozen=True)
class ReflectedBmSpec:
    """Brownian motion with constant drift mu, reflected at a and b."""

    mu: float
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise FptDomainError(f"reflecting boundaries need a < b, got a={self.a}, b={self.b}")

    def check_query(self, x: float, S: float) -> None:
        """Validate a from-below query a <= x <= S <= b."""
        check_ordered(self.a, x, S, self.b, names='a <= x <= S <= b')


@dataclass(frozen=True)
class TransformFn:
    """
    A Laplace-domain function theta -> value.

    `func` receives an mpmath number when `precise` is True (and may be called
    with negative or complex arguments through analytic continuation);
    otherwise it receives a Python float. `domain_min` is the largest lower
    bound of the real half-line on which the function is finite.
    """

    func: Callable
    domain_min: float = 0.0
    precise: bool = True
    name: str = ''

    def mp(self, theta):
        """Evaluate at the current mpmath working precision."""
        if self.precise:
            return self.func(mpmath.mpmathify(theta))
        return mpmath.mpf(self.func(float(mpmath.re(theta))))

    def __call__(self, theta: float) -> float:
        if self.precise:
            with mpmath.workdps(DEFAULT_FLOAT_DPS):
                return float(mpmath.re(self.func(mpmath.mpf(theta))))
        return float(self.func(float(theta)))


@dataclass(frozen=True)
class DensityOnInterval:
    """A probability density with explicit support [support_lo, support_hi]."""

    support_lo: float
    support_hi: float
    func: Callable[[float], float]
    name: str = ''

    def __post_init__(self):
        if not self.support_lo < self.support_hi:
            raise FptDomainError(
                f"density support needs lo < hi, got [{self.support_lo}, {self.support_hi}]"
            )

    def __call__(self, x: float) -> float:
        if x < self.support_lo or x > self.support_hi:
            return 0.0
        return float(self.func(x))

    def evaluate(self, xs) -> np.ndarray:
        """Pointwise values on an array of abscissae (zero off the support)."""
        return np.array([self(float(x)) for x in np.atleast_1d(xs)])

    def mass(self, tol: float = 1e-10) -> float:
        """Total mass by adaptive quadrature."""
        value, err = integrate.quad(self, self.support_lo, self.support_hi,
                                    epsabs=tol, limit=200)
        if not math.isfinite(value) or err > 100 * tol:
            raise QuadratureError(f"mass of {self.name or 'density'} did not converge (err={err:.2e})")
        return value

    def moment(self, order: int, tol: float = 1e-10) -> float:
        """E(eta^order) by adaptive quadrature."""
        value, _ = integrate.quad(lambda x: x ** order * self(x),
                                  self.support_lo, self.support_hi, epsabs=tol, limit=200)
        return value


# ---------------------------------------------------------------------------
# Coefficient functions for general diffusions (vectorized, picklable)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x):
        return self.value + 0.0 * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Linear:
    """slope * x + intercept"""

    slope: float
    intercept: float = 0.0

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


@dataclass(frozen=True)
class PowerLaw:
    """coef * x**exponent, evaluated on x >= 0 (negative overshoot is clipped)."""

    coef: float
    exponent: float

    def __call__(self, x):
        return self.coef * np.power(np.maximum(np.asarray(x, dtype=float), 0.0), self.exponent)


@dataclass(frozen=True)
class WrightFisherSigma:
    """sqrt(x (1 - x)) on [0, 1]."""

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return np.sqrt(x * (1.0 - x))


@dataclass(frozen=True)
class DiffusionSpec:
    """dX = mu(X) dt + sigma(X) dB + dL - dU, reflected at a < b."""

    mu: Callable
    sigma: Callable
    a: float
    b: float
    name: str = ''

    def __post_init__(self):
        if not self.a < self.b:
            raise FptDomainError(f"reflecting boundaries need a < b, got a={self.a}, b={self.b}")

    @classmethod
    def reflected_bm(cls, mu: float, a: float, b: float) -> 'DiffusionSpec':
        return cls(Constant(mu), Constant(1.0), a, b, name=f'reflected_bm(mu={mu})')

    @classmethod
    def reflected_ou(cls, kappa: float, sigma: float, a: float, b: float) -> 'DiffusionSpec':
        """Reflected Ornstein-Uhlenbeck: mu(x) = -kappa x, constant sigma."""
        return cls(Linear(-kappa), Constant(sigma), a, b,
                   name=f'reflected_ou(kappa={kappa}, sigma={sigma})')

    def as_bm(self) -> Optional[ReflectedBmSpec]:
        """The closed-form spec when this is unit-variance BM with constant drift."""
        if isinstance(self.mu, Constant) and isinstance(self.sigma, Constant) and self.sigma.value == 1.0:
            return ReflectedBmSpec(self.mu.value, self.a, self.b)
        return None


# ---------------------------------------------------------------------------
# Samplers for the initial position eta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PointMass:
    value: float

    @property
    def support(self):
        return (self.value, self.value)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, self.value, dtype=float)


@dataclass(frozen=True)
class UniformSampler:
    lo: float
    hi: float

    @property
    def support(self):
        return (self.lo, self.hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)


@dataclass(frozen=True)
class GridDensitySampler:
    """Inverse-CDF sampling of a density tabulated on a grid (trapezoid CDF)."""

    grid: tuple
    values: tuple

    @classmethod
    def from_density(cls, density: DensityOnInterval, n_points: int = 4001) -> 'GridDensitySampler':
        xs = np.linspace(density.support_lo, density.support_hi, n_points)
        return cls(tuple(xs), tuple(np.maximum(density.evaluate(xs), 0.0)))

    @property
    def support(self):
        return (self.grid[0], self.grid[-1])

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        xs = np.asarray(self.grid)
        cdf = integrate.cumulative_trapezoid(np.asarray(self.values), xs, initial=0.0)
        cdf /= cdf[-1]
        return np.interp(rng.uniform(size=n), cdf, xs)
