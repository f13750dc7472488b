"""
Finite-difference solver for the FPT boundary-value problems of a general
reflected diffusion with generator  L u = 1/2 sigma^2 u'' + mu u'.

From below (x <= S):  L u = theta u on (a, S), u'(a) = 0, and
E[exp(-theta tau_S(x))] = u(x)/u(S).
From above (x >= S):  L v = theta v on (S, b), v'(b) = 0, ratio v(x)/v(S).
Moments solve  L T_n = -n T_{n-1},  T_0 = 1,  T_n(S) = 0  with the same
Neumann condition at the reflecting end.

Second-order central differences on a uniform grid, Neumann conditions by a
ghost node, tridiagonal solve with scipy.linalg.solve_banded. One Richardson
step over the h and h/2 grids is applied by default.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline

from reflectfpt.domain import DiffusionSpec, TransformFn, check_ordered
from reflectfpt.errors import (
    DegenerateCoefficientError,
    DegenerateEndpointWarning,
    FptDomainError,
    SingularBvpError,
)

logger = logging.getLogger(__name__)

DEFAULT_NODES = 2001
SINGULAR_RATIO_TOL = 1e-12


@dataclass(frozen=True)
class BvpConfig:
    n_nodes: int = DEFAULT_NODES
    extrapolate: bool = True

    def __post_init__(self):
        if self.n_nodes < 5:
            raise FptDomainError(f"need at least 5 grid nodes, got {self.n_nodes}")


@dataclass
class BvpSolution:
    """u normalized so that u(S) = 1; ratio_at interpolates u(x)/u(S)."""

    grid: np.ndarray
    values: np.ndarray
    ratio_at: Callable[[float], float]


def _coefficients(spec: DiffusionSpec, grid: np.ndarray, neumann_index: int):
    """Drift and half-variance on the grid, checking for degenerate sigma."""
    h = abs(grid[1] - grid[0])
    sigma = np.asarray(spec.sigma(grid), dtype=float) * np.ones_like(grid)
    mu = np.asarray(spec.mu(grid), dtype=float) * np.ones_like(grid)
    interior = sigma[1:-1]
    if np.any(interior == 0):
        bad = grid[1:-1][interior == 0][0]
        raise DegenerateCoefficientError(f"sigma vanishes inside the interval at x={bad:g}")
    if sigma[neumann_index] == 0:
        shifted = grid[neumann_index] + (h if neumann_index == 0 else -h)
        warnings.warn(
            f"sigma vanishes at the reflecting endpoint {grid[neumann_index]:g}; "
            f"using coefficients at {shifted:g} (first-order accuracy there)",
            DegenerateEndpointWarning, stacklevel=3,
        )
        logger.warning(f"degenerate endpoint {grid[neumann_index]:g} in {spec.name or 'diffusion'}")
        sigma[neumann_index] = float(spec.sigma(shifted))
        mu[neumann_index] = float(spec.mu(shifted))
    return mu, 0.5 * sigma * sigma


def _solve_on_grid(spec: DiffusionSpec, lo: float, hi: float, n_nodes: int, theta: float,
                   rhs: Optional[np.ndarray], dirichlet_value: float, neumann_at: str):
    """
    Assemble and solve  1/2 s^2 u'' + mu u' - theta u = rhs  on n_nodes points.

    The Dirichlet node is S (hi when from below, lo when from above); the
    Neumann node is the reflecting end.
    """
    grid = np.linspace(lo, hi, n_nodes)
    h = (hi - lo) / (n_nodes - 1)
    neumann_index = 0 if neumann_at == 'lo' else n_nodes - 1
    dirichlet_index = n_nodes - 1 - neumann_index
    mu, half_var = _coefficients(spec, grid, neumann_index)

    lower = half_var / h ** 2 - mu / (2 * h)   # coefficient of u_{i-1}
    diag = -2 * half_var / h ** 2 - theta
    upper = half_var / h ** 2 + mu / (2 * h)   # coefficient of u_{i+1}
    f = np.zeros(n_nodes) if rhs is None else np.array(rhs, dtype=float)

    # Ghost node u_{-1} = u_1 (or u_{N} = u_{N-2}) folds one neighbour onto the other.
    if neumann_index == 0:
        upper[0] = upper[0] + lower[0]
        lower[0] = 0.0
    else:
        lower[-1] = lower[-1] + upper[-1]
        upper[-1] = 0.0
    diag[dirichlet_index] = 1.0
    f[dirichlet_index] = dirichlet_value
    if dirichlet_index == n_nodes - 1:
        lower[-1] = 0.0
    else:
        upper[0] = 0.0

    banded = np.zeros((3, n_nodes))
    banded[0, 1:] = upper[:-1]
    banded[1, :] = diag
    banded[2, :-1] = lower[1:]
    try:
        u = linalg.solve_banded((1, 1), banded, f)
    except linalg.LinAlgError as e:
        raise SingularBvpError(f"singular boundary-value system: {e}")
    if not np.all(np.isfinite(u)):
        raise SingularBvpError("boundary-value solution is not finite")
    return grid, u


def _solve(spec, lo, hi, theta, rhs_fn, dirichlet_value, neumann_at, cfg: BvpConfig):
    """Solve on h (and h/2 when extrapolating); returns values on the coarse grid."""
    grid, coarse = _solve_on_grid(spec, lo, hi, cfg.n_nodes, theta,
                                  None if rhs_fn is None else rhs_fn(cfg.n_nodes),
                                  dirichlet_value, neumann_at)
    if not cfg.extrapolate:
        return grid, coarse
    fine_n = 2 * cfg.n_nodes - 1
    _, fine = _solve_on_grid(spec, lo, hi, fine_n, theta,
                             None if rhs_fn is None else rhs_fn(fine_n),
                             dirichlet_value, neumann_at)
    return grid, (4 * fine[::2] - coarse) / 3


def solve_laplace_bvp(spec: DiffusionSpec, lo: float, hi: float, theta: float,
                      neumann_at: str, cfg: Optional[BvpConfig] = None) -> BvpSolution:
    """
    Solve L u = theta u on [lo, hi] with u' = 0 at the reflecting end and u = 1 at S.

    Args:
        spec: Diffusion coefficients.
        lo, hi: Interval ends.
        theta: Transform variable, > 0.
        neumann_at: 'lo' (FPT from below, S = hi) or 'hi' (from above, S = lo).
        cfg: Grid settings.
    """
    cfg = cfg or BvpConfig()
    if theta <= 0:
        raise FptDomainError(f"theta must be > 0, got {theta}")
    grid, u = _solve(spec, lo, hi, theta, None, 1.0, neumann_at, cfg)
    peak = float(np.max(np.abs(u)))
    if peak * SINGULAR_RATIO_TOL > 1.0:
        raise SingularBvpError(f"u(S) vanishes relative to max|u| = {peak:.3g}")
    spline = CubicSpline(grid, u)
    return BvpSolution(grid, u, lambda x: float(spline(x)))


def laplace_via_bvp_below(spec: DiffusionSpec, S: float, theta: float, x: float,
                          cfg: Optional[BvpConfig] = None) -> float:
    """E[exp(-theta tau_S(x))] from below, a <= x <= S."""
    check_ordered(spec.a, x, S, spec.b, names='a <= x <= S <= b')
    if x == S:
        return 1.0
    return solve_laplace_bvp(spec, spec.a, S, theta, 'lo', cfg).ratio_at(x)


def laplace_via_bvp_above(spec: DiffusionSpec, S: float, theta: float, x: float,
                          cfg: Optional[BvpConfig] = None) -> float:
    """E[exp(-theta tau_S(x))] from above, S <= x <= b."""
    check_ordered(spec.a, S, x, spec.b, names='a <= S <= x <= b')
    if x == S:
        return 1.0
    return solve_laplace_bvp(spec, S, spec.b, theta, 'hi', cfg).ratio_at(x)


def moment_profile(spec: DiffusionSpec, S: float, n: int, from_below: bool = True,
                   cfg: Optional[BvpConfig] = None) -> BvpSolution:
    """
    T_n on the grid via the recursion L T_k = -k T_{k-1}, T_0 = 1, T_k(S) = 0.

    Returns:
        BvpSolution whose ratio_at interpolates T_n(x).
    """
    cfg = cfg or BvpConfig()
    if n < 1:
        raise FptDomainError(f"moment order must be >= 1, got {n}")
    lo, hi, neumann_at = (spec.a, S, 'lo') if from_below else (S, spec.b, 'hi')
    if not lo < hi:
        raise FptDomainError(f"empty interval [{lo}, {hi}] for the moment problem")

    def recurse(n_nodes):
        prev = np.ones(n_nodes)
        for k in range(1, n + 1):
            _, prev = _solve_on_grid(spec, lo, hi, n_nodes, 0.0, -k * prev, 0.0, neumann_at)
        return prev

    grid = np.linspace(lo, hi, cfg.n_nodes)
    values = recurse(cfg.n_nodes)
    if cfg.extrapolate:
        values = (4 * recurse(2 * cfg.n_nodes - 1)[::2] - values) / 3
    spline = CubicSpline(grid, values)
    return BvpSolution(grid, values, lambda x: float(spline(x)))


def moments_via_bvp(spec: DiffusionSpec, S: float, n: int, x: float, from_below: bool = True,
                    cfg: Optional[BvpConfig] = None) -> float:
    """E[tau_S(x)^n] from below (Neumann at a) or from above (Neumann at b)."""
    if from_below:
        check_ordered(spec.a, x, S, spec.b, names='a <= x <= S <= b')
    else:
        check_ordered(spec.a, S, x, spec.b, names='a <= S <= x <= b')
    if x == S:
        return 0.0
    return max(moment_profile(spec, S, n, from_below, cfg).ratio_at(x), 0.0)


def bvp_transform_fn(spec: DiffusionSpec, x: float, S: float,
                     cfg: Optional[BvpConfig] = None) -> TransformFn:
    """theta -> laplace_via_bvp_below as a float TransformFn (theta >= 0)."""
    def func(theta):
        return 1.0 if theta == 0 else laplace_via_bvp_below(spec, S, theta, x, cfg)
    return TransformFn(func, domain_min=0.0, precise=False, name=f'bvp({spec.name}, x={x}, S={S})')
