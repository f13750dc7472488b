"""
Unit tests for the inverse first-passage solver.

The worked examples have known initial densities, so each solve is checked
against its closed-form g_hat, the recovered density and the forward map.
"""

import json
import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from reflectfpt import analytic_bm, presets
from reflectfpt.domain import ReflectedBmSpec, TransformFn
from reflectfpt.errors import FptDomainError
from reflectfpt.ifpt_solver import (
    REASON_MASS,
    REASON_MOMENT_BOUNDS,
    REASON_SECOND_MOMENT,
    IfptProblem,
    SolveStatus,
    compatibility_check,
    fhat_residual,
    forward_fhat,
    g2k_family,
    g2k_ghat,
    g2k_mean_fpt,
    g2k_second_moment_eta,
    jump_forward,
    jump_ghat,
    jump_solve_symmetric,
    mixture_fhat,
    power_exp_integral,
    solution_to_dict,
    solve_symmetric,
    solve_symmetric_above,
    symmetric_ghat,
)
from reflectfpt.laplace_numerics import moments_from_transform

BM = ReflectedBmSpec(0.0, 0.0, 2.0)
THETAS = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]


def example1_problem(direction='from_below'):
    return IfptProblem(BM, 1.0, presets.uniform_fhat(1.0), direction)


class TestForwardMap:
    """Tests for g_hat -> f_hat."""

    def test_uniform_start(self):
        value = forward_fhat(presets.uniform_ghat(0.0, 1.0), BM, 1.0, 1.0)
        assert value == pytest.approx(math.tanh(math.sqrt(2)) / math.sqrt(2), rel=1e-12)
        assert value == pytest.approx(0.6282, abs=1e-4)

    def test_start_at_barrier(self):
        for theta in (0.3, 4.0):
            assert forward_fhat(presets.point_mass_ghat(1.0), BM, 1.0, theta) == pytest.approx(1.0, rel=1e-12)

    def test_beta_start(self):
        assert forward_fhat(presets.beta_ghat(), BM, 1.0, 0.5) == pytest.approx(presets.beta_fhat()(0.5), rel=1e-10)

    @pytest.mark.parametrize('mu', [0.7, -0.6])
    def test_drifted_matches_mixture(self, mu):
        bm = ReflectedBmSpec(mu, 0.0, 2.0)
        for theta in (0.2, 1.0, 3.0):
            assert forward_fhat(presets.triangular_ghat(), bm, 1.0, theta) == pytest.approx(
                mixture_fhat(presets.triangular_density(), bm, 1.0, theta), abs=1e-7)

    def test_theta_zero_is_mass(self):
        assert forward_fhat(presets.uniform_ghat(0.0, 1.0), BM, 1.0, 0.0) == pytest.approx(1.0)

    def test_negative_theta(self):
        with pytest.raises(FptDomainError):
            forward_fhat(presets.uniform_ghat(0.0, 1.0), BM, 1.0, -0.5)


class TestSymmetricSolve:
    """Tests for the driftless symmetric solution from below."""

    def test_example1_uniform(self):
        solution = solve_symmetric(example1_problem(), n_points=21)
        assert solution.valid
        assert solution.support == (0.0, 1.0)
        assert solution.ghat(1.0) == pytest.approx(1 - math.exp(-1.0), rel=1e-12)
        assert np.max(np.abs(solution.recovered.values[2:-2] - 1.0)) <= 1e-4
        assert abs(solution.diagnostics.mass_error) <= 1e-6
        residual = fhat_residual(solution.ghat, presets.uniform_fhat(1.0), BM, 1.0, THETAS)
        assert max(residual.values()) <= 1e-9

    def test_example1_diagnostics(self):
        solution = solve_symmetric(example1_problem(), n_points=21)
        diag = solution.diagnostics
        assert diag.transform_mass == pytest.approx(1.0)
        assert diag.symmetry_residual <= 1e-12
        assert diag.compatibility.mean_tau == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert diag.compatibility.satisfied
        expected_mean = moments_from_transform(presets.uniform_fhat(1.0), 1).values[0]
        assert diag.compatibility.mean_tau == pytest.approx(expected_mean, abs=1e-6)

    @pytest.mark.parametrize('theta', [-2.0, 0.3, 1.0, 7.5])
    def test_example2_sine(self, theta):
        ghat = symmetric_ghat(presets.sine_fhat(1.0), 0.0, 1.0)
        assert ghat(theta) == pytest.approx(presets.sine_ghat(1.0)(theta), rel=1e-10)

    @pytest.mark.parametrize('theta', [-1.5, 0.4, 3.0])
    def test_example3_triangular(self, theta):
        ghat = symmetric_ghat(presets.triangular_fhat(), 0.0, 1.0)
        assert ghat(theta) == pytest.approx(presets.triangular_ghat()(theta), rel=1e-10)

    @pytest.mark.parametrize('theta', [-1.5, 0.4, 3.0])
    def test_example4_beta(self, theta):
        ghat = symmetric_ghat(presets.beta_fhat(), 0.0, 1.0)
        assert ghat(theta) == pytest.approx(presets.beta_ghat()(theta), rel=1e-10)

    def test_triangular_recovery(self):
        problem = IfptProblem(BM, 1.0, presets.triangular_fhat())
        solution = solve_symmetric(problem, n_points=21)
        assert solution.valid
        density = presets.triangular_density()
        errors = [abs(v - density(x)) for x, v in zip(solution.recovered.grid[2:-2], solution.recovered.values[2:-2])]
        assert max(errors) <= 1e-3

    def test_sine_recovery(self):
        problem = IfptProblem(BM, 1.0, presets.sine_fhat(1.0))
        solution = solve_symmetric(problem, n_points=21, n_terms=8192)
        assert solution.valid
        density = presets.sine_density(1.0)
        for x, v in zip(solution.recovered.grid[2:-2], solution.recovered.values[2:-2]):
            assert v == pytest.approx(density(x), abs=1e-6)

    def test_beta_recovery(self):
        problem = IfptProblem(BM, 1.0, presets.beta_fhat())
        solution = solve_symmetric(problem, n_points=21, n_terms=8192)
        assert solution.valid
        density = presets.beta_density()
        for x, v in zip(solution.recovered.grid[2:-2], solution.recovered.values[2:-2]):
            assert v == pytest.approx(density(x), abs=1e-6)

    @pytest.mark.parametrize('fhat', [presets.sine_fhat(1.0), presets.triangular_fhat(), presets.beta_fhat()],
                             ids=['sine', 'triangular', 'beta'])
    def test_round_trip(self, fhat):
        solution = solve_symmetric(IfptProblem(BM, 1.0, fhat), n_points=21)
        assert solution.valid
        residual = fhat_residual(solution.ghat, fhat, BM, 1.0, THETAS)
        assert max(residual.values()) <= 1e-9

    def test_shifted_interval(self):
        bm = ReflectedBmSpec(0.0, 1.0, 4.0)
        solution = solve_symmetric(IfptProblem(bm, 3.0, presets.uniform_fhat(2.0)), n_points=21)
        assert solution.valid
        assert solution.support == (1.0, 3.0)
        assert np.max(np.abs(solution.recovered.values[2:-2] - 0.5)) <= 1e-4

    def test_drift_is_rejected(self):
        problem = IfptProblem(ReflectedBmSpec(0.5, 0.0, 2.0), 1.0, presets.uniform_fhat(1.0))
        with pytest.raises(FptDomainError):
            solve_symmetric(problem)

    def test_direction_mismatch(self):
        with pytest.raises(FptDomainError):
            solve_symmetric(example1_problem('from_above'))

    def test_unnormalized_target(self):
        doubled = TransformFn(lambda theta: 2 * mpmath.exp(-theta), domain_min=-math.inf)
        with pytest.raises(FptDomainError):
            IfptProblem(BM, 1.0, doubled)


class TestNoSolution:
    """Targets no initial law on [a, S] can produce."""

    def test_exponential_target(self):
        solution = solve_symmetric(IfptProblem(BM, 1.0, presets.gamma_fhat(1.0)))
        assert solution.status is SolveStatus.NO_SOLUTION
        assert not solution.valid
        assert REASON_SECOND_MOMENT in solution.reasons
        assert solution.density is None

    def test_moment_bounds(self):
        solution = solve_symmetric(IfptProblem(BM, 1.0, presets.gamma_fhat(2.0)))
        assert solution.status is SolveStatus.NO_SOLUTION
        assert solution.reasons == [REASON_MOMENT_BOUNDS]

    def test_from_above(self):
        # E[(eta - S)(b - eta)] = 1/lam - 1/2 < 0
        problem = IfptProblem(BM, 1.0, presets.gamma_fhat(4.0), 'from_above')
        solution = solve_symmetric_above(problem)
        assert solution.status is SolveStatus.NO_SOLUTION
        assert solution.reasons == [REASON_MOMENT_BOUNDS]


class TestSolveAbove:
    """Tests for the symmetric solution from above."""

    def test_example1_from_above(self):
        solution = solve_symmetric_above(example1_problem('from_above'), n_points=21)
        assert solution.valid
        assert solution.support == (1.0, 2.0)
        assert np.max(np.abs(solution.recovered.values[2:-2] - 1.0)) <= 1e-4
        assert solution.diagnostics.compatibility.mean_tau == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert solution.ghat(1.0) == pytest.approx(presets.uniform_ghat(1.0, 2.0)(1.0), rel=1e-10)


class TestG2kFamily:
    """Tests for the g_{2k} family."""

    @pytest.mark.parametrize('theta', [0.2, 1.0, 4.0])
    def test_k1_is_beta(self, theta):
        fhat, _ = g2k_family(1)
        assert fhat(theta) == pytest.approx(presets.beta_fhat()(theta), rel=1e-10)
        assert g2k_ghat(1)(theta) == pytest.approx(presets.beta_ghat()(theta), rel=1e-10)

    def test_density_mass(self):
        for k in (1, 2, 5):
            _, density = g2k_family(k)
            assert density.mass() == pytest.approx(1.0, abs=1e-10)
            assert density.moment(2) == pytest.approx(g2k_second_moment_eta(k), abs=1e-10)

    def test_symmetric_ghat_matches(self):
        fhat, _ = g2k_family(3)
        ghat = symmetric_ghat(fhat, 0.0, 1.0)
        for theta in (-1.0, 0.7, 2.5):
            assert ghat(theta) == pytest.approx(g2k_ghat(3)(theta), rel=1e-10)

    @pytest.mark.parametrize('k,expected', [(1, 7.0 / 10.0), (3, 37.0 / 54.0)])
    def test_mean_fpt(self, k, expected):
        fhat, _ = g2k_family(k)
        assert g2k_mean_fpt(k) == pytest.approx(expected, rel=1e-12)
        assert compatibility_check(g2k_ghat(k), BM, 1.0).mean_tau == pytest.approx(expected, abs=1e-6)
        assert moments_from_transform(fhat, 1).values[0] == pytest.approx(expected, abs=1e-6)

    def test_k2_compatibility(self):
        fhat, _ = g2k_family(2)
        solution = solve_symmetric(IfptProblem(BM, 1.0, fhat), n_points=21)
        assert solution.valid
        compat = solution.diagnostics.compatibility
        assert compat.mean_tau == pytest.approx(29.0 / 42.0, abs=1e-6)
        assert compat.second_moment_eta == pytest.approx(13.0 / 42.0, abs=1e-6)
        assert g2k_mean_fpt(2) == pytest.approx(29.0 / 42.0)

    def test_invalid_k(self):
        with pytest.raises(FptDomainError):
            g2k_family(0)
        with pytest.raises(FptDomainError):
            g2k_ghat(1.5)

    @pytest.mark.parametrize('k,s', [(0, 0.5), (3, 0.5), (4, 2.5), (2, -3.0)])
    def test_power_exp_integral(self, k, s):
        with mpmath.workdps(30):
            expected = mpmath.quad(lambda u: u ** k * mpmath.exp(-s * u), [-1, 1])
            value = power_exp_integral(k, mpmath.mpf(s))
        assert float(value) == pytest.approx(float(expected), rel=1e-12)


class TestCompatibility:
    """Tests for the moment conditions linking eta and E(tau)."""

    def test_uniform(self):
        report = compatibility_check(presets.uniform_ghat(0.0, 1.0), BM, 1.0)
        assert report.mean_tau == pytest.approx(2.0 / 3.0, abs=1e-8)
        assert report.satisfied

    def test_triangular(self):
        report = compatibility_check(presets.triangular_ghat(), BM, 1.0)
        assert report.mean_tau == pytest.approx(17.0 / 24.0, abs=1e-8)

    @pytest.mark.parametrize('fhat,ghat,expected', [
        (presets.uniform_fhat(1.0), presets.uniform_ghat(0.0, 1.0), 2.0 / 3.0),
        (presets.sine_fhat(1.0), presets.sine_ghat(1.0), 0.5 + 2.0 / math.pi ** 2),
        (presets.triangular_fhat(), presets.triangular_ghat(), 17.0 / 24.0),
        (presets.beta_fhat(), presets.beta_ghat(), 7.0 / 10.0),
    ], ids=['uniform', 'sine', 'triangular', 'beta'])
    def test_mean_matches_transform_slope(self, fhat, ghat, expected):
        report = compatibility_check(ghat, BM, 1.0)
        slope_mean = moments_from_transform(fhat, 1).values[0]
        assert report.mean_tau == pytest.approx(expected, abs=1e-6)
        assert slope_mean == pytest.approx(expected, abs=1e-6)
        assert report.mean_tau == pytest.approx(slope_mean, abs=1e-5)

    def test_point_mass_at_barrier(self):
        report = compatibility_check(presets.point_mass_ghat(1.0), BM, 1.0)
        assert report.mean_tau == pytest.approx(0.0, abs=1e-8)
        assert report.mean_nonnegative

    def test_drifted_mean(self):
        bm = ReflectedBmSpec(0.5, 0.0, 2.0)
        expected, _ = integrate.quad(lambda x: analytic_bm.mean_fpt(bm, x, 1.0), 0.0, 1.0)
        report = compatibility_check(presets.uniform_ghat(0.0, 1.0), bm, 1.0)
        assert report.mean_tau == pytest.approx(expected, abs=1e-6)
        assert report.satisfied

    def test_from_above(self):
        report = compatibility_check(presets.uniform_ghat(1.0, 2.0), BM, 1.0, 'from_above')
        assert report.mean_tau == pytest.approx(2.0 / 3.0, abs=1e-8)

    def test_from_above_with_drift(self):
        with pytest.raises(FptDomainError):
            compatibility_check(presets.uniform_ghat(1.0, 2.0), ReflectedBmSpec(0.5, 0.0, 2.0), 1.0, 'from_above')


class TestCatastrophe:
    """Tests for the killed-at-rate-lam variant."""

    def test_forward_matches_uniform_start(self):
        value = jump_forward(presets.uniform_ghat(0.0, 1.0), 0.7, 1.0, 1.3)
        assert value == pytest.approx(presets.catastrophe_fhat(0.7, 1.0)(1.3), rel=1e-10)

    def test_forward_at_zero(self):
        assert jump_forward(presets.uniform_ghat(0.0, 1.0), 0.7, 1.0, 0.0) == pytest.approx(1.0)

    def test_vanishing_rate(self):
        ghat = presets.uniform_ghat(0.0, 1.0)
        assert jump_forward(ghat, 1e-10, 1.0, 1.0) == pytest.approx(forward_fhat(ghat, BM, 1.0, 1.0), abs=1e-8)

    @pytest.mark.parametrize('lam', [0.2, 0.5, 0.7])
    def test_ghat_is_uniform(self, lam):
        ghat = jump_ghat(presets.catastrophe_fhat(lam, 1.0), lam, 1.0)
        root = math.sqrt(2 * lam)
        for theta in (0.4, root, root + 5e-5, root + 1e-3, 3.0):
            assert ghat(theta) == pytest.approx(presets.uniform_ghat(0.0, 1.0)(theta), abs=1e-10)

    @pytest.mark.parametrize('theta', [0.5, 1.0, 3.0])
    def test_small_rate_limit(self, theta):
        target = presets.uniform_fhat(1.0)
        killed = jump_ghat(target, 1e-8, 1.0)(theta)
        assert killed == pytest.approx(symmetric_ghat(target, 0.0, 1.0)(theta), abs=1e-6)

    @pytest.mark.parametrize('lam', [0.2, 0.5, 0.7])
    def test_solve_example5(self, lam):
        solution = jump_solve_symmetric(presets.catastrophe_fhat(lam, 1.0), lam, 1.0, n_points=21)
        assert solution.valid
        assert solution.diagnostics.compatibility is None
        assert np.max(np.abs(solution.recovered.values[2:-2] - 1.0)) <= 1e-4

    def test_exponential_target_has_no_mass(self):
        solution = jump_solve_symmetric(presets.gamma_fhat(0.5), 0.5, 1.0)
        assert solution.status is SolveStatus.NO_SOLUTION
        assert solution.reasons == [REASON_MASS]

    def test_rate_validation(self):
        with pytest.raises(FptDomainError):
            jump_ghat(presets.catastrophe_fhat(0.5, 1.0), 0.0, 1.0)
        with pytest.raises(FptDomainError):
            jump_forward(presets.uniform_ghat(0.0, 1.0), -1.0, 1.0, 1.0)


class TestSolutionToDict:
    """Tests for the JSON report of a solution."""

    def test_report(self):
        solution = solve_symmetric(example1_problem(), n_points=21)
        report = solution_to_dict(solution, include_density=True)
        assert report['status'] == 'SOLVED'
        assert report['support'] == [0.0, 1.0]
        conditions = report['diagnostics']['compatibility']['conditions']
        assert set(conditions) == {'mean_nonnegative', 'drift_bound', 'scaled_mean_bound',
                                   'driftless_mean_nonnegative'}
        assert all(entry['holds'] is True for entry in conditions.values())
        assert conditions['driftless_mean_nonnegative']['inequality'].endswith('>= 0')
        assert report['diagnostics']['compatibility']['satisfied'] is True
        assert len(report['density']['x']) == 21
        json.dumps(report)

    def test_no_solution_report(self):
        report = solution_to_dict(solve_symmetric(IfptProblem(BM, 1.0, presets.gamma_fhat(1.0))))
        assert report['status'] == 'NO_SOLUTION'
        assert report['reasons']
        assert 'density' not in report


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
