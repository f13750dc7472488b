"""
Inverse first-passage problem for reflected drifted Brownian motion.

Given the Laplace transform f_hat of a target FPT law through S, find the
transform g_hat of the initial-position density eta on [a, S] (from below) or
[S, b] (from above). The forward map g_hat -> f_hat holds for any drift; the
solve paths cover the driftless symmetric cases and the catastrophe (killing
at rate lam) variant. A failed solve is a NO_SOLUTION value with reasons,
not an exception.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy import integrate

from reflectfpt import analytic_bm
from reflectfpt.domain import DensityOnInterval, ReflectedBmSpec, TransformFn, check_ordered
from reflectfpt.errors import FptDomainError
from reflectfpt.laplace_numerics import (
    DEFAULT_COSINE_TERMS,
    DEFAULT_DENSITY_POINTS,
    RecoveredDensity,
    moments_from_transform,
    recover_density,
)
from reflectfpt.presets import sinhc

logger = logging.getLogger(__name__)

FORWARD_DPS = 30
MASS_TOL = 1e-6
DENSITY_MASS_TOL = 1e-6
DENSITY_NEGATIVITY_TOL = -1e-6
MOMENT_FLOOR = 1e-9
# |theta -+ sqrt(2 lam)| below this uses the Taylor form of the jump solution.
JUMP_SINGULAR_RADIUS = 1e-4
SYMMETRY_THETAS = (0.1, 0.5, 1.0, 2.0)

REASON_MASS = 'transform mass defect'
REASON_SECOND_MOMENT = 'second moment nonpositive'
REASON_MOMENT_BOUNDS = 'moment bounds violated'
REASON_NEGATIVE_DENSITY = 'negative density'
REASON_DENSITY_MASS = 'mass defect'
REASON_NEGATIVE_MEAN = 'negative mean first-passage time'

# Inequality checked by each CompatReport flag, as printed in reports.
CONDITION_TEXT = {
    'mean_nonnegative': 'E(tau) = E(S - eta)/mu - e^{2 mu a} E(e^{-2 mu eta} - e^{-2 mu S})/(2 mu^2) >= 0',
    'drift_bound': 'E(tau) <= E(S - eta)/mu for mu > 0',
    'scaled_mean_bound': 'mu E(tau) >= -e^{2 mu a} E(e^{-2 mu eta} - e^{-2 mu S})/(2 mu)',
    'driftless_mean_nonnegative': '-E(eta^2) + 2a E(eta) + S(S - 2a) >= 0',
}


class SolveStatus(enum.Enum):
    SOLVED = 'SOLVED'
    NO_SOLUTION = 'NO_SOLUTION'


@dataclass(frozen=True)
class IfptProblem:
    bm: ReflectedBmSpec
    S: float
    fhat: TransformFn
    direction: str = 'from_below'

    def __post_init__(self):
        if self.direction not in ('from_below', 'from_above'):
            raise FptDomainError(f"direction must be from_below or from_above, got {self.direction}")
        check_ordered(self.bm.a, self.S, self.bm.b, names='a <= S <= b')
        if abs(self.fhat(0.0) - 1.0) > 1e-10:
            raise FptDomainError(f"target transform must equal 1 at theta = 0, got {self.fhat(0.0)}")

    @property
    def support(self) -> Tuple[float, float]:
        if self.direction == 'from_below':
            return self.bm.a, self.S
        return self.S, self.bm.b


@dataclass
class CompatReport:
    """Necessary conditions linking E(tau) to the moments of eta."""

    mean_tau: float
    mean_eta: float
    second_moment_eta: float
    exp_moment: float
    mean_nonnegative: bool
    drift_bound: bool
    scaled_mean_bound: bool
    driftless_mean_nonnegative: bool
    indeterminate: bool = False

    @property
    def satisfied(self) -> bool:
        return (self.mean_nonnegative and self.drift_bound and self.scaled_mean_bound
                and self.driftless_mean_nonnegative)


@dataclass
class Diagnostics:
    transform_mass: float
    mass_error: Optional[float] = None
    min_density: Optional[float] = None
    compatibility: Optional[CompatReport] = None
    moment_table: List[Tuple[int, float]] = field(default_factory=list)
    symmetry_residual: Optional[float] = None


@dataclass
class IfptSolution:
    status: SolveStatus
    ghat: TransformFn
    support: Tuple[float, float]
    diagnostics: Diagnostics
    reasons: List[str] = field(default_factory=list)
    recovered: Optional[RecoveredDensity] = None

    @property
    def valid(self) -> bool:
        return self.status is SolveStatus.SOLVED

    @property
    def density(self) -> Optional[DensityOnInterval]:
        return self.recovered.density if self.recovered is not None else None


# ---------------------------------------------------------------------------
# Forward map g_hat -> f_hat
# ---------------------------------------------------------------------------

def _is_driftless(mu: float, a: float, S: float) -> bool:
    return abs(mu) * max(S - a, 1.0) < analytic_bm.SMALL_DRIFT_THRESHOLD


def forward_fhat_mp(ghat: TransformFn, mu: float, a: float, S: float, theta):
    """
    f_hat(theta) at the current mpmath precision.

    General drift, k = sqrt(mu^2 + 2 theta), c = (k + mu)^2 / 2:
        e^{-S(k-mu)} [theta e^{2ak} g(k+mu) + c g(mu-k)] / [theta e^{-2(S-a)k} + c]
    Driftless:
        e^{-kS} [e^{2ak} g(k) + g(-k)] / [1 + e^{-2(S-a)k}],  k = sqrt(2 theta)
    """
    theta = mpmath.mpf(theta)
    if theta == 0:
        return ghat.mp(0)
    e = mpmath.exp
    if _is_driftless(mu, a, S):
        k = mpmath.sqrt(2 * theta)
        return e(-k * S) * (e(2 * a * k) * ghat.mp(k) + ghat.mp(-k)) / (1 + e(-2 * (S - a) * k))
    k = mpmath.sqrt(mu * mu + 2 * theta)
    k_minus_mu = 2 * theta / (k + mu) if mu >= 0 else k - mu
    c = (k + mu) ** 2 / 2 if mu >= 0 else (2 * theta / k_minus_mu) ** 2 / 2
    return (e(-S * k_minus_mu) * (theta * e(2 * a * k) * ghat.mp(k + mu) + c * ghat.mp(mu - k))
            / (theta * e(-2 * (S - a) * k) + c))


def forward_fhat(ghat: TransformFn, bm: ReflectedBmSpec, S: float, theta: float) -> float:
    """
    FPT transform through S from below implied by the initial-density transform g_hat.

    Args:
        ghat: Transform of a density supported in [a, S].
        bm: Drift and boundaries.
        S: Barrier.
        theta: Transform variable, >= 0.
    """
    check_ordered(bm.a, S, bm.b, names='a <= S <= b')
    if theta < 0:
        raise FptDomainError(f"theta must be >= 0, got {theta}")
    with mpmath.workdps(FORWARD_DPS):
        return float(mpmath.re(forward_fhat_mp(ghat, bm.mu, bm.a, S, theta)))


def fhat_residual(ghat: TransformFn, fhat: TransformFn, bm: ReflectedBmSpec, S: float,
                  thetas: Sequence[float]) -> Dict[float, float]:
    """|forward_fhat(ghat) - fhat| on a theta grid, for candidate solutions of any drift."""
    return {float(t): abs(forward_fhat(ghat, bm, S, t) - fhat(t)) for t in thetas}


def mixture_fhat(density: DensityOnInterval, bm: ReflectedBmSpec, S: float, theta: float) -> float:
    """Integral of E[exp(-theta tau_S(x))] g(x) dx over [a, S] by quadrature."""
    value, _ = integrate.quad(lambda x: analytic_bm.laplace_fpt_below(bm, x, S, theta) * density(x),
                              density.support_lo, density.support_hi, epsabs=1e-12, limit=200)
    return value


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def moment_diagnostics(ghat: TransformFn, lo: float, hi: float):
    """
    E(eta), E(eta^2) from g_hat and the reasons they rule out a density on (lo, hi).

    Any density on (lo, hi) has E(eta^2) > 0 and E[(eta - lo)(hi - eta)] > 0.

    Returns:
        (MomentResult, list of failure reasons)
    """
    moments = moments_from_transform(ghat, 2)
    m1, m2 = moments.values
    reasons = []
    if m2 <= MOMENT_FLOOR:
        reasons.append(REASON_SECOND_MOMENT)
    elif -m2 + (lo + hi) * m1 - lo * hi <= MOMENT_FLOOR:
        reasons.append(REASON_MOMENT_BOUNDS)
    return moments, reasons


def compatibility_check(ghat: TransformFn, bm: ReflectedBmSpec, S: float,
                        direction: str = 'from_below', tol: float = 1e-9) -> CompatReport:
    """
    E(tau_S) implied by the moments of eta and the necessary conditions on it.

    From below with drift mu:
        E(tau) = (S - E eta)/mu - e^{2 mu a} (E e^{-2 mu eta} - e^{-2 mu S}) / (2 mu^2)
    Driftless:
        E(tau) = -E(eta^2) + 2a E(eta) + S(S - 2a)
    From above (driftless only): E(tau) = (b - S)^2 - E((b - eta)^2).
    """
    moments = moments_from_transform(ghat, 2)
    m1, m2 = moments.values
    mu, a = bm.mu, bm.a
    if direction == 'from_above':
        if not _is_driftless(mu, S, bm.b):
            raise FptDomainError("from-above compatibility is available for the driftless case only")
        b = bm.b
        mean_tau = (b - S) ** 2 - (b * b - 2 * b * m1 + m2)
        ok = mean_tau >= -tol
        return CompatReport(mean_tau, m1, m2, 1.0, ok, True, True, ok, moments.indeterminate)

    driftless_mean = -m2 + 2 * a * m1 + S * (S - 2 * a)
    if _is_driftless(mu, a, S):
        ok = driftless_mean >= -tol
        return CompatReport(driftless_mean, m1, m2, 1.0, ok, True, True, ok, moments.indeterminate)

    with mpmath.workdps(FORWARD_DPS + 20):
        mu_m = mpmath.mpf(mu)
        exp_moment = ghat.mp(2 * mu_m)
        excess = mpmath.exp(2 * mu_m * a) * (exp_moment - mpmath.exp(-2 * mu_m * S))
        mean_tau = float(mpmath.re((2 * mu_m * (S - m1) - excess) / (2 * mu_m ** 2)))
        scaled_rhs = float(mpmath.re(-excess / (2 * mu_m)))
        exp_moment = float(mpmath.re(exp_moment))
    return CompatReport(
        mean_tau=mean_tau,
        mean_eta=m1,
        second_moment_eta=m2,
        exp_moment=exp_moment,
        mean_nonnegative=mean_tau >= -tol,
        drift_bound=mu <= 0 or mean_tau <= (S - m1) / mu + tol,
        scaled_mean_bound=mu * mean_tau >= scaled_rhs - tol,
        driftless_mean_nonnegative=driftless_mean >= -tol,
        indeterminate=moments.indeterminate,
    )


def _symmetry_residual(ghat: TransformFn, lo: float, hi: float) -> float:
    """max relative |g(-t) - e^{(lo+hi) t} g(t)|; zero for densities symmetric about (lo+hi)/2."""
    worst = 0.0
    with mpmath.workdps(FORWARD_DPS):
        for t in SYMMETRY_THETAS:
            left = ghat.mp(-t)
            right = mpmath.exp((lo + hi) * t) * ghat.mp(t)
            worst = max(worst, float(abs(left - right) / max(1, abs(left))))
    return worst


def _finish(ghat: TransformFn, lo: float, hi: float, bm: ReflectedBmSpec, S: float,
            direction: str, n_points: int, n_terms: int,
            with_compat: bool = True) -> IfptSolution:
    """Run the diagnostic ladder and build the solution value."""
    transform_mass = ghat(0.0)
    diagnostics = Diagnostics(transform_mass=transform_mass)
    support = (lo, hi)
    if abs(transform_mass - 1.0) > MASS_TOL:
        return IfptSolution(SolveStatus.NO_SOLUTION, ghat, support, diagnostics, [REASON_MASS])

    moments, reasons = moment_diagnostics(ghat, lo, hi)
    diagnostics.moment_table = [(1, moments.values[0]), (2, moments.values[1])]
    if reasons:
        logger.info(f"no solution for {ghat.name}: {reasons}")
        return IfptSolution(SolveStatus.NO_SOLUTION, ghat, support, diagnostics, reasons)

    diagnostics.symmetry_residual = _symmetry_residual(ghat, lo, hi)
    recovered = recover_density(ghat, lo, hi, n_points=n_points, n_terms=n_terms)
    diagnostics.mass_error = recovered.mass_error
    diagnostics.min_density = recovered.min_density
    if recovered.min_density < DENSITY_NEGATIVITY_TOL:
        reasons.append(REASON_NEGATIVE_DENSITY)
    if abs(recovered.mass_error) > DENSITY_MASS_TOL:
        reasons.append(REASON_DENSITY_MASS)

    if with_compat:
        diagnostics.compatibility = compatibility_check(ghat, bm, S, direction)
        if not diagnostics.compatibility.mean_nonnegative:
            reasons.append(REASON_NEGATIVE_MEAN)

    status = SolveStatus.NO_SOLUTION if reasons else SolveStatus.SOLVED
    logger.info(f"{ghat.name}: {status.value} (mass error {recovered.mass_error:.2e}, "
                f"min density {recovered.min_density:.2e})")
    return IfptSolution(status, ghat, support, diagnostics, reasons, recovered)


# ---------------------------------------------------------------------------
# Driftless symmetric solutions
# ---------------------------------------------------------------------------

def symmetric_ghat(fhat: TransformFn, a: float, S: float) -> TransformFn:
    """[e^{-S t} + e^{-(2a - S) t}] / [1 + e^{(S - a) t}] f_hat(t^2/2): symmetric about (a+S)/2."""
    e = mpmath.exp

    def func(theta):
        return (e(-S * theta) + e(-(2 * a - S) * theta)) / (1 + e((S - a) * theta)) * fhat.mp(theta ** 2 / 2)
    return TransformFn(func, domain_min=-math.inf, name=f'ghat[{fhat.name}]')


def symmetric_ghat_above(fhat: TransformFn, S: float, b: float) -> TransformFn:
    """[e^{-S t} + e^{-(2b - S) t}] / [1 + e^{(S - b) t}] f_hat(t^2/2): symmetric about (S+b)/2."""
    e = mpmath.exp

    def func(theta):
        return (e(-S * theta) + e(-(2 * b - S) * theta)) / (1 + e((S - b) * theta)) * fhat.mp(theta ** 2 / 2)
    return TransformFn(func, domain_min=-math.inf, name=f'ghat_above[{fhat.name}]')


def _require_driftless(problem: IfptProblem, direction: str) -> None:
    if problem.direction != direction:
        raise FptDomainError(f"expected a {direction} problem, got {problem.direction}")
    lo, hi = problem.support
    if not _is_driftless(problem.bm.mu, lo, hi):
        raise FptDomainError(
            f"symmetric solve needs zero drift, got mu={problem.bm.mu}; "
            "use forward_fhat/fhat_residual for drifted candidates"
        )
    if not lo < hi:
        raise FptDomainError(f"empty support [{lo}, {hi}]")


def solve_symmetric(problem: IfptProblem, n_points: int = DEFAULT_DENSITY_POINTS,
                    n_terms: int = DEFAULT_COSINE_TERMS) -> IfptSolution:
    """
    Initial density on [a, S], symmetric about (a+S)/2, for a driftless from-below problem.

    Args:
        problem: Target transform and geometry (mu = 0).
        n_points: Cells of the recovered density.
        n_terms: Cosine terms used to recover the density.

    Returns:
        IfptSolution (SOLVED or NO_SOLUTION with reasons).
    """
    _require_driftless(problem, 'from_below')
    a, S = problem.support
    ghat = symmetric_ghat(problem.fhat, a, S)
    return _finish(ghat, a, S, problem.bm, problem.S, 'from_below', n_points, n_terms)


def solve_symmetric_above(problem: IfptProblem, n_points: int = DEFAULT_DENSITY_POINTS,
                          n_terms: int = DEFAULT_COSINE_TERMS) -> IfptSolution:
    """Initial density on [S, b], symmetric about (S+b)/2, for a driftless from-above problem."""
    _require_driftless(problem, 'from_above')
    S, b = problem.support
    ghat = symmetric_ghat_above(problem.fhat, S, b)
    return _finish(ghat, S, b, problem.bm, problem.S, 'from_above', n_points, n_terms)


# ---------------------------------------------------------------------------
# The g_{2k} family on [0, 1]
# ---------------------------------------------------------------------------

def power_exp_integral(k: int, s):
    """
    I_k(s) = integral over [-1, 1] of u^k e^{-s u} du.

    Taylor series for |s| < 1; otherwise I_0 = 2 sinh(s)/s and
    I_k = [(-1)^k e^s - e^{-s}]/s + (k/s) I_{k-1}.
    """
    if abs(s) < 1:
        total, term_fact, j = mpmath.mpf(0), mpmath.mpf(1), 0
        while True:
            if (k + j) % 2 == 0:
                term = term_fact * 2 / (k + j + 1)
                total += term
                if abs(term) < mpmath.eps * max(1, abs(total)):
                    break
            j += 1
            term_fact *= -s / j
        return total
    value = 2 * mpmath.sinh(s) / s
    for m in range(1, k + 1):
        value = ((-1) ** m * mpmath.exp(s) - mpmath.exp(-s)) / s + m / s * value
    return value


def g2k_ghat(k: int) -> TransformFn:
    """c e^{-t/2} [sinhc(t/2) - I_{2k}(t/2)/2],  c = 1 + 1/(2k)."""
    _check_k(k)
    c = 1 + mpmath.mpf(1) / (2 * k)
    return TransformFn(lambda t: c * mpmath.exp(-t / 2) * (sinhc(t / 2) - power_exp_integral(2 * k, t / 2) / 2),
                       domain_min=-math.inf, name=f'g2k_ghat(k={k})')


def _check_k(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise FptDomainError(f"k must be a positive integer, got {k}")


def g2k_family(k: int) -> Tuple[TransformFn, DensityOnInterval]:
    """
    FPT transform and initial density of the g_{2k} family on a = 0, S = 1.

    g_{2k}(x) = (1 + 1/(2k)) (1 - (2x - 1)^{2k});
    f_{2k}(t) = c cosh(z)/cosh(2z) [sinhc(z) - I_{2k}(z)/2],  z = sqrt(t/2).
    """
    _check_k(k)
    c = 1 + mpmath.mpf(1) / (2 * k)

    def fhat(theta):
        z = mpmath.sqrt(theta / 2)
        return c * mpmath.cosh(z) / mpmath.cosh(2 * z) * (sinhc(z) - power_exp_integral(2 * k, z) / 2)

    cf = 1 + 1 / (2 * k)
    density = DensityOnInterval(0.0, 1.0, lambda x: cf * (1 - (2 * x - 1) ** (2 * k)), name=f'g2k(k={k})')
    return TransformFn(fhat, domain_min=-math.pi ** 2 / 8, name=f'g2k_fhat(k={k})'), density


def g2k_mean_fpt(k: int) -> float:
    return (8 * k + 13) / (6 * (2 * k + 3))


def g2k_second_moment_eta(k: int) -> float:
    return (4 * k + 5) / (6 * (2 * k + 3))


# ---------------------------------------------------------------------------
# Catastrophe variant: killing at rate lam, a = 0
# ---------------------------------------------------------------------------

def jump_forward(ghat: TransformFn, lam: float, S: float, theta: float) -> float:
    """
    FPT transform with catastrophes at rate lam, for g_hat symmetric about S/2:
    [theta g(r) (1 + e^{S r}) / (2 cosh(S r)) + lam] / (lam + theta),  r = sqrt(2(lam + theta)).
    """
    if lam < 0 or theta < 0:
        raise FptDomainError(f"need lam >= 0 and theta >= 0, got lam={lam}, theta={theta}")
    if lam == 0 and theta == 0:
        return ghat(0.0)
    with mpmath.workdps(FORWARD_DPS):
        r = mpmath.sqrt(2 * (lam + mpmath.mpf(theta)))
        ratio = (mpmath.exp(-S * r) + 1) / (1 + mpmath.exp(-2 * S * r))
        return float(mpmath.re((theta * ghat.mp(r) * ratio + lam) / (lam + theta)))


def jump_ghat(fbar_hat: TransformFn, lam: float, S: float) -> TransformFn:
    """
    2 cosh(S t) / [(t^2/2 - lam)(1 + e^{S t})] [(t^2/2) fbar(t^2/2 - lam) - lam].

    The bracket vanishes with the prefactor's denominator at t = +-sqrt(2 lam); there the
    ratio is summed from the Taylor coefficients of the bracket.
    """
    if lam <= 0:
        raise FptDomainError(f"catastrophe rate must be positive, got {lam}")

    def bracket(t):
        return t * t / 2 * fbar_hat.mp(t * t / 2 - lam) - lam

    def func(t):
        if t == 0:
            # taken as a limit; fbar may have a pole at -lam
            t = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
        prefactor = 2 * mpmath.cosh(S * t) / (1 + mpmath.exp(S * t))
        root = mpmath.sqrt(2 * lam)
        for t0 in (root, -root):
            delta = t - t0
            if abs(delta) < JUMP_SINGULAR_RADIUS:
                coeffs = mpmath.taylor(bracket, t0, 4)
                quotient = coeffs[1] + coeffs[2] * delta + coeffs[3] * delta ** 2 + coeffs[4] * delta ** 3
                return prefactor * quotient / ((t + t0) / 2)
        return prefactor * bracket(t) / (t * t / 2 - lam)

    return TransformFn(func, domain_min=-math.inf, name=f'jump_ghat[{fbar_hat.name}, lam={lam}]')


def jump_solve_symmetric(fbar_hat: TransformFn, lam: float, S: float,
                         n_points: int = DEFAULT_DENSITY_POINTS,
                         n_terms: int = DEFAULT_COSINE_TERMS) -> IfptSolution:
    """Initial density on (0, S), symmetric about S/2, for the catastrophe process."""
    if S <= 0:
        raise FptDomainError(f"barrier must be positive, got {S}")
    ghat = jump_ghat(fbar_hat, lam, S)
    # b only has to exceed S; killed paths never reach it
    bm = ReflectedBmSpec(0.0, 0.0, 2 * S)
    # E(tau) under killing is not the driftless formula, so no compatibility veto
    return _finish(ghat, 0.0, S, bm, S, 'from_below', n_points, n_terms, with_compat=False)


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def solution_to_dict(solution: IfptSolution, include_density: bool = False) -> dict:
    """JSON-ready report mirroring IfptSolution."""
    diag = solution.diagnostics
    report = {
        'status': solution.status.value,
        'reasons': list(solution.reasons),
        'ghat': solution.ghat.name,
        'support': list(solution.support),
        'diagnostics': {
            'transform_mass': diag.transform_mass,
            'mass_error': diag.mass_error,
            'min_density': diag.min_density,
            'symmetry_residual': diag.symmetry_residual,
            'moment_table': [[order, value] for order, value in diag.moment_table],
            'compatibility': None,
        },
    }
    if diag.compatibility is not None:
        c = diag.compatibility
        report['diagnostics']['compatibility'] = {
            'mean_tau': c.mean_tau,
            'mean_eta': c.mean_eta,
            'second_moment_eta': c.second_moment_eta,
            'exp_moment': c.exp_moment,
            'conditions': {
                name: {'holds': bool(getattr(c, name)), 'inequality': text}
                for name, text in CONDITION_TEXT.items()
            },
            'satisfied': c.satisfied,
            'indeterminate': c.indeterminate,
        }
    if include_density and solution.recovered is not None:
        report['density'] = {
            'x': [float(x) for x in solution.recovered.grid],
            'g': [float(v) for v in solution.recovered.values],
        }
    return report
