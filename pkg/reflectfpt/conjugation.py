"""
Reflected diffusions conjugated to regulated Brownian motion.

An increasing map V turns dX = mu(X) dt + sigma(X) dB (reflected on [a, b]) into
reflected BM with constant drift nu on [V(a), V(b)] when V' = 1/sigma and
mu = 1/2 sigma sigma' + nu sigma. FPT problems for X are then FPT problems for
the image BM, and a density g~ solved in V-coordinates maps back as
g(x) = g~(V(x)) V'(x).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from reflectfpt.domain import (
    Constant,
    DensityOnInterval,
    DiffusionSpec,
    Linear,
    PowerLaw,
    ReflectedBmSpec,
    TransformFn,
    WrightFisherSigma,
    check_ordered,
)
from reflectfpt.errors import FptDomainError
from reflectfpt.ifpt_solver import IfptProblem, IfptSolution, solve_symmetric
from reflectfpt.laplace_numerics import (
    DEFAULT_COSINE_TERMS,
    DEFAULT_DENSITY_POINTS,
    RecoveredDensity,
    richardson_derivative,
)

logger = logging.getLogger(__name__)

SUPPORT_TOL = 1e-9
INVERSE_TOL = 1e-10


class ConjugationMap:
    """
    V with its derivative and inverse, on the reflecting interval [a, b].

    Subclasses implement V, vprime and vinv on their natural domain and the
    SDER coefficients the map conjugates.
    """

    name = 'conjugation'
    natural_domain: Tuple[float, float] = (-math.inf, math.inf)

    def __init__(self, a: float, b: float):
        lo, hi = self.natural_domain
        if not a < b:
            raise FptDomainError(f"reflecting boundaries need a < b, got a={a}, b={b}")
        if a < lo or b > hi:
            raise FptDomainError(f"{self.name}: [{a}, {b}] leaves the natural domain [{lo}, {hi}]")
        self.a = float(a)
        self.b = float(b)

    def __repr__(self):
        return f"{type(self).__name__}(a={self.a}, b={self.b})"

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.natural_domain
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise FptDomainError(f"{self.name}: argument outside [{lo}, {hi}]")
        return np.clip(x, lo, hi)

    def V(self, x):
        raise NotImplementedError

    def vprime(self, x):
        raise NotImplementedError

    def vinv(self, y):
        raise NotImplementedError

    @property
    def drift(self) -> float:
        """Constant drift nu of the image BM."""
        return 0.0

    def mu_coefficient(self) -> Callable:
        raise NotImplementedError

    def sigma_coefficient(self) -> Callable:
        raise NotImplementedError

    def diffusion(self) -> DiffusionSpec:
        """The SDER this map conjugates, on [a, b]."""
        return DiffusionSpec(self.mu_coefficient(), self.sigma_coefficient(), self.a, self.b,
                             name=self.name)

    def inverse_error(self, n: int = 101) -> float:
        """max |vinv(V(x)) - x| on a grid of [a, b]."""
        xs = np.linspace(self.a, self.b, n)
        return float(np.max(np.abs(self.vinv(self.V(xs)) - xs)))


class IdentityMap(ConjugationMap):
    name = 'identity'

    def V(self, x):
        return self._check(x) * 1.0

    def vprime(self, x):
        return np.ones_like(self._check(x))

    def vinv(self, y):
        return np.asarray(y, dtype=float) * 1.0

    def mu_coefficient(self):
        return Constant(0.0)

    def sigma_coefficient(self):
        return Constant(1.0)


class PowerMap(ConjugationMap):
    """
    sigma(x) = c x^p, mu(x) = 1/2 c^2 p x^(2p - 1), V(x) = x^(1-p) / (c (1-p)).

    p = 2/3 gives the cubic entry, p = 3/4 the quartic one, p = 1/2 the
    Feller (CIR-type) diffusion with constant drift 1/4.
    """

    natural_domain = (0.0, math.inf)

    def __init__(self, a: float, b: float, coef: float = 1.0, exponent: float = 0.5, name: str = 'power'):
        if coef <= 0 or not 0 < exponent < 1:
            raise FptDomainError(f"power map needs c > 0 and 0 < p < 1, got c={coef}, p={exponent}")
        self.name = name
        self.coef = float(coef)
        self.exponent = float(exponent)
        super().__init__(a, b)

    def __repr__(self):
        return f"PowerMap({self.name}, c={self.coef}, p={self.exponent}, a={self.a}, b={self.b})"

    def V(self, x):
        q = 1.0 - self.exponent
        return np.power(self._check(x), q) / (self.coef * q)

    def vprime(self, x):
        with np.errstate(divide='ignore'):
            return 1.0 / (self.coef * np.power(self._check(x), self.exponent))

    def vinv(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < -1e-12):
            raise FptDomainError(f"{self.name}: inverse needs y >= 0")
        q = 1.0 - self.exponent
        return np.power(np.maximum(y, 0.0) * self.coef * q, 1.0 / q)

    def mu_coefficient(self):
        drift_coef = 0.5 * self.coef ** 2 * self.exponent
        if abs(2 * self.exponent - 1) < 1e-15:
            return Constant(drift_coef)
        return PowerLaw(drift_coef, 2 * self.exponent - 1)

    def sigma_coefficient(self):
        return PowerLaw(self.coef, self.exponent)


class WrightFisherMap(ConjugationMap):
    """V(x) = 2 arcsin(sqrt(x)) for dX = (1/4 - x/2) dt + sqrt(x (1 - x)) dB on [0, 1]."""

    name = 'wright_fisher'
    natural_domain = (0.0, 1.0)

    def V(self, x):
        return 2.0 * np.arcsin(np.sqrt(self._check(x)))

    def vprime(self, x):
        x = self._check(x)
        with np.errstate(divide='ignore'):
            return 1.0 / np.sqrt(x * (1.0 - x))

    def vinv(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < -1e-12) or np.any(y > math.pi + 1e-12):
            raise FptDomainError("wright_fisher: inverse needs 0 <= y <= pi")
        return np.sin(np.clip(y, 0.0, math.pi) / 2.0) ** 2

    def mu_coefficient(self):
        return Linear(-0.5, 0.25)

    def sigma_coefficient(self):
        return WrightFisherSigma()


class GbmMap(ConjugationMap):
    """dX = r X dt + s X dB on [a, b] with a > 0; V = ln(x)/s, image drift (r - s^2/2)/s."""

    name = 'gbm'
    natural_domain = (0.0, math.inf)

    def __init__(self, a: float, b: float, r: float = 0.05, sigma: float = 0.2):
        if sigma <= 0:
            raise FptDomainError(f"gbm volatility must be positive, got {sigma}")
        if a <= 0:
            raise FptDomainError(f"gbm needs a > 0 (ln x is undefined at 0), got a={a}")
        self.r = float(r)
        self.sigma = float(sigma)
        super().__init__(a, b)

    def __repr__(self):
        return f"GbmMap(r={self.r}, sigma={self.sigma}, a={self.a}, b={self.b})"

    def V(self, x):
        x = self._check(x)
        with np.errstate(divide='ignore'):
            return np.log(x) / self.sigma

    def vprime(self, x):
        with np.errstate(divide='ignore'):
            return 1.0 / (self.sigma * self._check(x))

    def vinv(self, y):
        return np.exp(self.sigma * np.asarray(y, dtype=float))

    @property
    def drift(self) -> float:
        return (self.r - 0.5 * self.sigma ** 2) / self.sigma

    def mu_coefficient(self):
        return Linear(self.r)

    def sigma_coefficient(self):
        return Linear(self.sigma)


_CATALOG: Dict[str, Callable[..., ConjugationMap]] = {
    'identity': lambda a, b: IdentityMap(a, b),
    'cubic_power': lambda a, b: PowerMap(a, b, 1.0, 2.0 / 3.0, name='cubic_power'),
    'quartic_power': lambda a, b, c=1.0: PowerMap(a, b, c, 0.75, name='quartic_power'),
    'cir_feller': lambda a, b: PowerMap(a, b, 1.0, 0.5, name='cir_feller'),
    'wright_fisher': lambda a, b: WrightFisherMap(a, b),
    'gbm': lambda a, b, r=0.05, sigma=0.2: GbmMap(a, b, r, sigma),
}

_DEFAULT_DOMAIN = {'gbm': (0.5, 2.0)}


def catalog_names():
    return sorted(_CATALOG)


def catalog(name: str, a: Optional[float] = None, b: Optional[float] = None, **params) -> ConjugationMap:
    """
    Look up a conjugation map by its CLI-facing name.

    Args:
        name: One of identity, cubic_power, quartic_power, cir_feller, wright_fisher, gbm.
        a, b: Reflecting interval (default [0, 1]; [0.5, 2] for gbm).
        **params: c for quartic_power; r and sigma for gbm.
    """
    if name not in _CATALOG:
        raise FptDomainError(f"unknown conjugation map '{name}'; known: {', '.join(catalog_names())}")
    lo, hi = _DEFAULT_DOMAIN.get(name, (0.0, 1.0))
    try:
        cmap = _CATALOG[name](lo if a is None else a, hi if b is None else b, **params)
    except TypeError as e:
        raise FptDomainError(f"bad parameters for {name}: {e}")
    error = cmap.inverse_error()
    if error > INVERSE_TOL * max(1.0, abs(cmap.b)):
        raise FptDomainError(f"{name}: vinv(V(x)) misses x by {error:.2e}")
    return cmap


def bm_image(cmap: ConjugationMap) -> ReflectedBmSpec:
    """The reflected BM on [V(a), V(b)] with the induced drift."""
    return ReflectedBmSpec(cmap.drift, float(cmap.V(cmap.a)), float(cmap.V(cmap.b)))


def map_solution_back(gtilde: DensityOnInterval, cmap: ConjugationMap, S: float) -> DensityOnInterval:
    """
    g(x) = g~(V(x)) V'(x) on [a, S] for a density g~ on [V(a), V(S)].

    Raises:
        FptDomainError: if g~ is not supported on [V(a), V(S)].
    """
    check_ordered(cmap.a, S, cmap.b, names='a <= S <= b')
    va, vs = float(cmap.V(cmap.a)), float(cmap.V(S))
    if abs(gtilde.support_lo - va) > SUPPORT_TOL or abs(gtilde.support_hi - vs) > SUPPORT_TOL:
        raise FptDomainError(
            f"support mismatch: density on [{gtilde.support_lo}, {gtilde.support_hi}], "
            f"expected [{va}, {vs}]"
        )

    def func(x):
        return gtilde(float(cmap.V(x))) * float(cmap.vprime(x))
    return DensityOnInterval(cmap.a, S, func, name=f'{gtilde.name}|{cmap.name}')


def conjugated_uniform_density(cmap: ConjugationMap, S: float) -> DensityOnInterval:
    """V'(x) / (V(S) - V(a)): the preimage of the uniform law on [V(a), V(S)]."""
    check_ordered(cmap.a, S, cmap.b, names='a <= S <= b')
    width = float(cmap.V(S) - cmap.V(cmap.a))
    return DensityOnInterval(cmap.a, S, lambda x: float(cmap.vprime(x)) / width,
                             name=f'uniform|{cmap.name}')


@dataclass
class ConjugationResidual:
    drift_residual: float
    derivative_residual: float
    grid: np.ndarray

    @property
    def max_residual(self) -> float:
        return max(self.drift_residual, self.derivative_residual)


def verify_conjugation(cmap: ConjugationMap, spec: DiffusionSpec,
                       lo: Optional[float] = None, hi: Optional[float] = None,
                       n: int = 41) -> ConjugationResidual:
    """
    max |mu - 1/2 sigma sigma' - nu sigma| and max |V' - 1/sigma| on a grid.

    sigma' comes from a Richardson-extrapolated central difference with a step
    scaled to the distance from the natural-domain edge.
    """
    lo = cmap.a if lo is None else lo
    hi = cmap.b if hi is None else hi
    nat_lo, nat_hi = cmap.natural_domain
    xs = np.linspace(lo, hi, n)
    # the difference stencil needs room on both sides
    xs = xs[(xs > nat_lo) & (xs < nat_hi)]
    nu = cmap.drift
    drift_res = deriv_res = 0.0
    for x in xs:
        h = 0.1 * min(x - nat_lo, nat_hi - x, 1.0)
        dsigma, _ = richardson_derivative(lambda z: float(spec.sigma(z)), float(x), 1, h, levels=4)
        sigma = float(spec.sigma(x))
        drift_res = max(drift_res, abs(float(spec.mu(x)) - 0.5 * sigma * dsigma - nu * sigma))
        deriv_res = max(deriv_res, abs(float(cmap.vprime(x)) - 1.0 / sigma))
    logger.debug(f"{cmap.name}: drift residual {drift_res:.2e}, V' residual {deriv_res:.2e}")
    return ConjugationResidual(drift_res, deriv_res, xs)


def _map_recovered(recovered: RecoveredDensity, cmap: ConjugationMap, S: float,
                   edge_cells: int = 2) -> RecoveredDensity:
    """Carry an inverted V-coordinate table back to x-coordinates (mass is invariant)."""
    grid = np.asarray(cmap.vinv(recovered.grid), dtype=float)
    values = recovered.values * np.asarray(cmap.vprime(grid), dtype=float)
    interior = values[edge_cells:len(values) - edge_cells] if len(values) > 2 * edge_cells else values
    return RecoveredDensity(grid, values, recovered.mass, float(np.min(interior)),
                            map_solution_back(recovered.density, cmap, S))


def solve_conjugated_symmetric(cmap: ConjugationMap, S: float, fhat: TransformFn,
                               n_points: int = DEFAULT_DENSITY_POINTS,
                               n_terms: int = DEFAULT_COSINE_TERMS) -> IfptSolution:
    """
    Symmetric IFPT solution in V-coordinates, mapped back to [a, S].

    The returned ghat is the V-coordinate transform; the recovered density
    table and `density` are in x-coordinates.
    """
    if abs(cmap.drift) > 0:
        raise FptDomainError(f"{cmap.name} has image drift {cmap.drift:g}; the symmetric solve needs zero drift")
    bm = bm_image(cmap)
    problem = IfptProblem(bm, float(cmap.V(S)), fhat)
    logger.info(f"solving in V-coordinates: [{bm.a:g}, {problem.S:g}] for {cmap.name}")
    solution = solve_symmetric(problem, n_points=n_points, n_terms=n_terms)
    if solution.recovered is None:
        return IfptSolution(solution.status, solution.ghat, (cmap.a, S), solution.diagnostics,
                            solution.reasons)
    return IfptSolution(solution.status, solution.ghat, (cmap.a, S), solution.diagnostics,
                        solution.reasons, _map_recovered(solution.recovered, cmap, S))
