"""
Laplace-domain numerics shared by the solvers.

- numerical inversion (Gaver-Stehfest or Talbot, through mpmath.invertlaplace)
- recovery of a compactly supported density from its transform (damped cosine series)
- forward transform of a sampled density by adaptive quadrature
- moments from derivatives at theta = 0 (Richardson-extrapolated differences)
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import mpmath
import numpy as np
from scipy import integrate

from reflectfpt.domain import DEFAULT_FLOAT_DPS, DensityOnInterval, TransformFn
from reflectfpt.errors import FptDomainError, MethodUnsuitableError, QuadratureError

logger = logging.getLogger(__name__)

DEFAULT_METHOD = 'gaver_stehfest'
DEFAULT_STEHFEST_ORDER = 64
# Beyond this order Stehfest weights swamp double-precision transform values.
MAX_FLOAT_STEHFEST_ORDER = 16
DEFAULT_DENSITY_POINTS = 201
DEFAULT_COSINE_TERMS = 4096
# Re(theta) * (hi - lo) on the line where g_hat is sampled for density recovery.
COSINE_DAMPING = 0.25
QUADRATURE_TOL = 1e-10
MOMENT_DPS = 50
INDETERMINATE_REL_TOL = 1e-3

_MPMATH_METHODS = {'gaver_stehfest': 'stehfest', 'talbot': 'talbot'}


@dataclass(frozen=True)
class InversionConfig:
    method: str = DEFAULT_METHOD
    order: int = DEFAULT_STEHFEST_ORDER

    def __post_init__(self):
        if self.method not in _MPMATH_METHODS:
            raise FptDomainError(f"unknown inversion method '{self.method}'")
        if self.method == 'gaver_stehfest' and (self.order < 8 or self.order % 2):
            raise FptDomainError(f"Gaver-Stehfest order must be even and >= 8, got {self.order}")


@dataclass
class RecoveredDensity:
    """A density tabulated on cell centres from its transform."""

    grid: np.ndarray
    values: np.ndarray
    mass: float
    min_density: float
    density: DensityOnInterval

    @property
    def mass_error(self) -> float:
        return self.mass - 1.0


@dataclass
class MomentResult:
    values: List[float] = field(default_factory=list)
    spreads: List[float] = field(default_factory=list)
    indeterminate: bool = False


def invert(F: TransformFn, t: float, cfg: Optional[InversionConfig] = None) -> float:
    """
    Invert a Laplace transform at a single point t > 0.

    Args:
        F: Transform to invert.
        t: Time (or space) abscissa, strictly positive.
        cfg: Method and order (default: Gaver-Stehfest of order 64).

    Returns:
        Approximation of the original function at t.
    """
    cfg = cfg or InversionConfig()
    if t <= 0:
        raise FptDomainError(f"inversion abscissa must be positive, got {t}")
    if not F.precise:
        if cfg.method == 'talbot':
            raise MethodUnsuitableError("Talbot needs a transform evaluable on the complex contour")
        if cfg.order > MAX_FLOAT_STEHFEST_ORDER:
            raise MethodUnsuitableError(
                f"Stehfest order {cfg.order} needs an extended-precision transform "
                f"(float transforms allow order <= {MAX_FLOAT_STEHFEST_ORDER})"
            )
    kwargs = {'degree': cfg.order} if cfg.method == 'gaver_stehfest' else {}
    try:
        value = mpmath.invertlaplace(F.mp, t, method=_MPMATH_METHODS[cfg.method], **kwargs)
    except (ZeroDivisionError, OverflowError) as e:
        raise MethodUnsuitableError(f"{cfg.method} inversion failed at t={t}: {e}")
    value = float(mpmath.re(value))
    if not math.isfinite(value):
        raise MethodUnsuitableError(f"{cfg.method} inversion overflowed at t={t}")
    return value


def cosine_coefficients(ghat: TransformFn, lo: float, hi: float, n_terms: int,
                        damping: float = COSINE_DAMPING) -> np.ndarray:
    """
    Cosine-series coefficients on [lo, hi] of g(x) exp(-c (x - lo)), c = damping / (hi - lo).

    A_m = 2/L Re[exp((c + i u_m) lo) g_hat(c + i u_m)],  u_m = m pi / L.
    g_hat must continue analytically to complex arguments.
    """
    if not ghat.precise:
        raise MethodUnsuitableError("cosine recovery needs a transform evaluable at complex arguments")
    width = hi - lo
    c = damping / width
    coefs = np.empty(n_terms)
    with mpmath.workdps(DEFAULT_FLOAT_DPS):
        for m in range(n_terms):
            z = mpmath.mpc(c, m * math.pi / width)
            coefs[m] = 2.0 / width * float(mpmath.re(mpmath.exp(z * lo) * ghat.func(z)))
            if (m + 1) % 1024 == 0:
                logger.debug(f"[{m + 1}/{n_terms}] cosine coefficients of {ghat.name or 'transform'}")
    return coefs


def recover_density(ghat: TransformFn, lo: float, hi: float,
                    n_points: int = DEFAULT_DENSITY_POINTS,
                    n_terms: int = DEFAULT_COSINE_TERMS,
                    edge_cells: int = 2) -> RecoveredDensity:
    """
    Recover a density supported in [lo, hi] from its (entire) transform.

    The damped density g(x) exp(-c (x - lo)) is expanded in cos(m pi (x - lo) / L);
    its even extension is continuous across lo and hi, so jumps of g at the
    support edges do not slow convergence. Coefficients come from g_hat on the
    vertical line Re(theta) = c, which also keeps away from the zeros of
    1 + exp(L theta) in the symmetric solutions.

    Args:
        ghat: Transform of the density (precise, complex-capable).
        lo, hi: Support bounds.
        n_points: Number of cells.
        n_terms: Cosine terms kept.
        edge_cells: Cells at each end excluded from the nonnegativity minimum.

    Returns:
        RecoveredDensity with the exact mass of the truncated series and the
        interior minimum on cell centres.
    """
    if not lo < hi:
        raise FptDomainError(f"support needs lo < hi, got [{lo}, {hi}]")
    if n_terms < 1:
        raise FptDomainError(f"n_terms must be >= 1, got {n_terms}")
    width = hi - lo
    c = COSINE_DAMPING / width
    coefs = cosine_coefficients(ghat, lo, hi, n_terms)
    coefs[0] *= 0.5
    u = np.arange(n_terms) * math.pi / width

    grid = lo + (np.arange(n_points) + 0.5) * width / n_points
    y = grid - lo
    values = np.exp(c * y) * (np.cos(np.outer(y, u)) @ coefs)

    # integral over [0, L] of exp(c y) cos(u y)
    edge = np.where(np.arange(n_terms) % 2 == 0, 1.0, -1.0) * math.exp(c * width) - 1.0
    mass = float(np.sum(coefs * edge * c / (c * c + u * u)))
    interior = values[edge_cells:n_points - edge_cells] if n_points > 2 * edge_cells else values
    min_density = float(np.min(interior))

    grid_t, values_t = tuple(grid), tuple(values)
    density = DensityOnInterval(lo, hi, lambda x: float(np.interp(x, grid_t, values_t)),
                                name=f'{ghat.name}|inverted')
    return RecoveredDensity(grid, values, mass, min_density, density)


def transform_of_samples(density: DensityOnInterval, theta: float,
                         tol: float = QUADRATURE_TOL) -> float:
    """
    Bilateral Laplace transform of a density by adaptive quadrature.

    Args:
        density: Density on a bounded support.
        theta: Real transform variable (negative values allowed).
        tol: Absolute tolerance.

    Returns:
        Integral of exp(-theta x) g(x) over the support.
    """
    value, err = integrate.quad(lambda x: math.exp(-theta * x) * density(x),
                                density.support_lo, density.support_hi,
                                epsabs=tol, epsrel=1e-12, limit=200)
    if not math.isfinite(value) or err > 100 * max(tol, 1e-12 * abs(value)):
        raise QuadratureError(f"transform quadrature did not converge at theta={theta} (err={err:.2e})")
    return value


def transform_fn_of_density(density: DensityOnInterval) -> TransformFn:
    """Wrap transform_of_samples as a TransformFn (entire, since the support is compact)."""
    return TransformFn(lambda theta: transform_of_samples(density, theta),
                       domain_min=-math.inf, precise=False,
                       name=f'{density.name}|quadrature')


def finite_difference(fn: Callable, x0, order: int, h, one_sided: bool = False):
    """order-th derivative by a central (or forward) difference of step h."""
    total = 0
    for j in range(order + 1):
        coef = math.comb(order, j)
        if one_sided:
            total += (-1) ** (order - j) * coef * fn(x0 + j * h)
        else:
            total += (-1) ** j * coef * fn(x0 + (order / 2 - j) * h)
    return total / h ** order


def richardson_derivative(fn: Callable, x0, order: int, h, levels: int = 4,
                          one_sided: bool = False):
    """
    Richardson tableau over steps h, h/2, h/4, ...

    Central differences have an error expansion in h**2 (ratio 4 per column),
    forward differences in h (ratio 2).

    Returns:
        (best estimate, |difference of the last two diagonal entries|)
    """
    ratio = 2 if one_sided else 4
    table = []
    for i in range(levels + 1):
        row = [finite_difference(fn, x0, order, h / 2 ** i, one_sided)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (ratio ** j - 1))
        table.append(row)
    best = table[levels][levels]
    spread = abs(best - table[levels - 1][levels - 1]) if levels else 0
    return best, spread


def moments_from_transform(F: TransformFn, max_order: int) -> MomentResult:
    """
    E(X^k) = (-1)^k F^(k)(0) for k = 1..max_order.

    Central differences are used when F is finite on both sides of 0;
    otherwise forward differences. Precise transforms are differentiated at
    MOMENT_DPS digits.

    Returns:
        MomentResult; `indeterminate` is set when the last two Richardson
        levels disagree by more than INDETERMINATE_REL_TOL (relative, floor 1).
    """
    if max_order < 1:
        raise FptDomainError(f"max_order must be >= 1, got {max_order}")
    central = F.domain_min < -0.01
    result = MomentResult()
    if F.precise:
        with mpmath.workdps(MOMENT_DPS):
            h = mpmath.mpf('0.01')
            for n in range(1, max_order + 1):
                d, spread = richardson_derivative(F.mp, mpmath.mpf(0), n, h,
                                                  levels=4 if central else 8,
                                                  one_sided=not central)
                result.values.append(float(mpmath.re((-1) ** n * d)))
                result.spreads.append(float(abs(spread)))
    else:
        for n in range(1, max_order + 1):
            d, spread = richardson_derivative(F, 0.0, n, 0.05, levels=4 if central else 5,
                                              one_sided=not central)
            result.values.append((-1) ** n * d)
            result.spreads.append(abs(spread))
    result.indeterminate = any(
        not math.isfinite(v) or s > INDETERMINATE_REL_TOL * max(abs(v), 1.0)
        for v, s in zip(result.values, result.spreads)
    )
    if result.indeterminate:
        logger.info(f"moments of {F.name or 'transform'} indeterminate: spreads={result.spreads}")
    return result


def cdf_from_transform(F: TransformFn, ts, cfg: Optional[InversionConfig] = None) -> np.ndarray:
    """
    P(tau <= t) on a grid by inverting F(theta)/theta.

    Args:
        F: Laplace transform E[exp(-theta tau)] of a law on [0, inf).
        ts: Abscissae; t <= 0 maps to 0.
        cfg: Inversion settings.

    Returns:
        CDF values clipped to [0, 1].
    """
    def integrated(theta):
        return F.func(theta) / theta
    G = TransformFn(integrated, domain_min=0.0, precise=F.precise, name=f'{F.name}/theta')
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.zeros_like(ts)
    for i, t in enumerate(ts):
        if t > 0:
            out[i] = invert(G, float(t), cfg)
    return np.clip(out, 0.0, 1.0)
