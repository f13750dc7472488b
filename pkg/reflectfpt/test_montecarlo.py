"""
Unit tests for the Monte Carlo oracle.

Statistical checks use fixed seeds; the 10^4-path acceptance runs are marked slow.
"""

import math

import numpy as np
import pytest
from scipy import stats

from reflectfpt import analytic_bm, presets
from reflectfpt.domain import DiffusionSpec, PointMass, UniformSampler
from reflectfpt.errors import CensoringWarning, FptDomainError, ReflectFptError
from reflectfpt.montecarlo import (
    FptSampleSet,
    SimConfig,
    _fold,
    default_horizon,
    ks_statistic,
    sample_fpt,
    sample_fpt_with_catastrophe,
    samples_to_csv,
    simulate_reflected_path,
    skorokhod_reflect,
)

BM = DiffusionSpec.reflected_bm(0.0, 0.0, 2.0)


def unit_uniform_cdf(t):
    return presets.uniform_start_cdf(1.0, t)


class TestSimConfig:
    """Tests for simulation settings."""

    def test_defaults(self):
        cfg = SimConfig()
        assert cfg.dt == 1e-4
        assert cfg.n_paths == 10_000
        assert cfg.batch_size == 8192
        assert cfg.bridge

    @pytest.mark.parametrize('kwargs', [
        {'dt': 0.0},
        {'dt': 0.1, 'horizon': 0.01},
        {'n_paths': 0},
        {'workers': 0},
        {'seed': -1},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(FptDomainError):
            SimConfig(**kwargs)


class TestReflectedPath:
    """Tests for single reflected paths."""

    def test_fold(self):
        assert _fold(-0.3, 0.0, 1.0) == pytest.approx((0.3, 0.6, 0.0))
        assert _fold(2.5, 0.0, 1.0) == pytest.approx((0.5, 1.0, 3.0))
        assert _fold(0.4, 0.0, 1.0) == (0.4, 0.0, 0.0)

    def test_decomposition(self):
        spec = DiffusionSpec.reflected_bm(0.3, 0.0, 1.0)
        dt = 1e-3
        increments = np.random.default_rng(3).standard_normal(2000) * math.sqrt(dt)
        path = simulate_reflected_path(spec, 0.5, SimConfig(dt=dt), increments=increments)
        free = 0.5 + np.concatenate(([0.0], np.cumsum(0.3 * dt + increments)))
        rebuilt = free + np.cumsum(path.lower_push) - np.cumsum(path.upper_push)
        np.testing.assert_allclose(path.states, rebuilt, atol=1e-10)
        assert path.states.min() >= 0.0 and path.states.max() <= 1.0
        assert path.times[-1] == pytest.approx(2.0)

    def test_fold_close_to_skorokhod(self):
        spec = DiffusionSpec.reflected_bm(0.0, 0.0, 1e6)
        dt = 1e-3
        increments = np.random.default_rng(11).standard_normal(5000) * math.sqrt(dt)
        folded = simulate_reflected_path(spec, 0.05, SimConfig(dt=dt), increments=increments).states
        exact = skorokhod_reflect(0.05, increments, 0.0)
        assert np.max(np.abs(folded - exact)) <= np.max(np.abs(increments)) + 1e-9
        assert np.all(folded >= exact - 1e-9)

    def test_stationary_law_is_uniform(self):
        spec = DiffusionSpec.reflected_bm(0.0, 0.0, 1.0)
        dt = 1e-2
        increments = np.random.default_rng(8).standard_normal(100_000) * math.sqrt(dt)
        states = simulate_reflected_path(spec, 0.5, SimConfig(dt=dt), increments=increments).states
        assert np.mean(states) == pytest.approx(0.5, abs=0.025)
        assert np.var(states) == pytest.approx(1.0 / 12.0, abs=0.006)

    def test_seeded_path_needs_horizon(self):
        with pytest.raises(FptDomainError):
            simulate_reflected_path(BM, 0.5, SimConfig())
        path = simulate_reflected_path(BM, 0.5, SimConfig(dt=1e-2, horizon=1.0, seed=4))
        assert path.states.size == 101

    def test_start_outside(self):
        with pytest.raises(FptDomainError):
            simulate_reflected_path(BM, 2.5, SimConfig(dt=1e-2, horizon=1.0))


class TestSampleFpt:
    """Tests for batched first-passage sampling."""

    def test_start_at_barrier(self):
        samples = sample_fpt(BM, PointMass(1.0), 1.0, SimConfig(n_paths=100))
        assert np.all(samples.times == 0.0)
        assert samples.censored_count == 0

    def test_initial_law_outside(self):
        with pytest.raises(FptDomainError):
            sample_fpt(BM, UniformSampler(0.0, 1.5), 1.0, SimConfig(n_paths=10))
        with pytest.raises(FptDomainError):
            sample_fpt(BM, PointMass(0.5), 2.5, SimConfig(n_paths=10))

    def test_serial_and_parallel_agree(self):
        cfg = SimConfig(dt=1e-3, n_paths=200, batch_size=50, seed=7)
        serial = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, cfg)
        parallel = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0,
                              SimConfig(dt=1e-3, n_paths=200, batch_size=50, seed=7, workers=2))
        np.testing.assert_array_equal(serial.times, parallel.times)

    def test_seed_changes_samples(self):
        a = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, SimConfig(dt=1e-3, n_paths=50, seed=1))
        b = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, SimConfig(dt=1e-3, n_paths=50, seed=2))
        assert not np.array_equal(a.times, b.times)

    def test_uniform_start_law(self):
        samples = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, SimConfig(dt=1e-3, n_paths=2000, seed=0))
        assert samples.n_paths == 2000
        assert ks_statistic(samples, unit_uniform_cdf) <= 0.05
        assert samples.mean() == pytest.approx(2.0 / 3.0, abs=4 * samples.std_error() + 0.01)

    def test_step_refinement(self):
        for dt in (4e-3, 1e-3):
            samples = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, SimConfig(dt=dt, n_paths=2000, seed=3))
            assert samples.mean() == pytest.approx(2.0 / 3.0, abs=4 * samples.std_error() + 0.01)
            assert ks_statistic(samples, unit_uniform_cdf) <= 0.05

    def test_barrier_close_to_reflecting_end(self):
        # most steps touch a = 0, so reflected steps must not be bridge-corrected
        samples = sample_fpt(BM, PointMass(0.0), 0.1, SimConfig(dt=1e-5, horizon=0.2, n_paths=2000, seed=6))
        assert samples.censored_count == 0
        assert ks_statistic(samples, lambda t: analytic_bm.spectral_cdf(0.0, 0.1, t)) <= 0.05

    def test_censoring_warns(self):
        cfg = SimConfig(dt=1e-3, horizon=1e-3, n_paths=100)
        with pytest.warns(CensoringWarning):
            samples = sample_fpt(BM, PointMass(0.0), 1.0, cfg)
        assert samples.censored_count == 100
        assert np.all(np.isinf(samples.times))
        with pytest.raises(ReflectFptError):
            ks_statistic(samples, unit_uniform_cdf)

    def test_default_horizon(self):
        assert default_horizon(BM, 1.0, 0.0) == pytest.approx(50.0)

    @pytest.mark.slow
    def test_uniform_start_law_acceptance(self):
        samples = sample_fpt(BM, UniformSampler(0.0, 1.0), 1.0, SimConfig(n_paths=10_000, seed=0, workers=2))
        assert ks_statistic(samples, unit_uniform_cdf) <= 0.02


class TestCatastrophe:
    """Tests for killing at an exponential time."""

    def test_fast_clock_dominates(self):
        lam = 1e4
        cfg = SimConfig(dt=1e-3, horizon=1.0, n_paths=20_000, seed=5)
        samples = sample_fpt_with_catastrophe(lam, BM, PointMass(0.0), 1.0, cfg)
        assert samples.mean() == pytest.approx(1.0 / lam, rel=0.05)

    def test_clock_after_horizon_stays_censored(self):
        cfg = SimConfig(dt=1e-3, horizon=0.05, n_paths=2000, seed=0)
        with pytest.warns(CensoringWarning):
            samples = sample_fpt_with_catastrophe(0.1, BM, PointMass(0.0), 1.0, cfg)
        assert np.all(samples.crossed <= 0.05)
        assert samples.censored_count > 1900
        assert samples.censored_count == int(np.sum(np.isinf(samples.times)))

    def test_catastrophe_law(self):
        samples = sample_fpt_with_catastrophe(0.5, BM, UniformSampler(0.0, 1.0), 1.0,
                                              SimConfig(dt=1e-3, n_paths=2000, seed=2))
        assert samples.censored_count == 0
        assert ks_statistic(samples, lambda t: presets.catastrophe_cdf(0.5, 1.0, t)) <= 0.05

    def test_rate_validation(self):
        with pytest.raises(FptDomainError):
            sample_fpt_with_catastrophe(0.0, BM, PointMass(0.0), 1.0, SimConfig(n_paths=10))

    @pytest.mark.slow
    def test_catastrophe_law_acceptance(self):
        samples = sample_fpt_with_catastrophe(0.5, BM, UniformSampler(0.0, 1.0), 1.0,
                                              SimConfig(n_paths=10_000, seed=1, workers=2))
        assert ks_statistic(samples, lambda t: presets.catastrophe_cdf(0.5, 1.0, t)) <= 0.02


class TestKsStatistic:
    """Tests for the KS distance."""

    def test_uniform_target(self):
        cdf = lambda t: np.clip(np.asarray(t) / 4.0, 0.0, 1.0)  # noqa: E731
        assert ks_statistic([1.0, 2.0, 3.0], cdf) == pytest.approx(0.25)

    def test_atom_at_zero(self):
        cdf = lambda t: np.where(np.asarray(t) >= 0, 1.0, 0.0)  # noqa: E731
        assert ks_statistic(np.zeros(50), cdf) == 0.0

    def test_censored_values_count(self):
        cdf = lambda t: np.clip(np.asarray(t) / 4.0, 0.0, 1.0)  # noqa: E731
        assert ks_statistic([1.0, np.inf], cdf) == pytest.approx(0.25)

    def test_exponential_sample(self):
        x = np.random.default_rng(0).exponential(size=5000)
        assert ks_statistic(x, lambda t: 1.0 - np.exp(-np.asarray(t))) <= 0.03

    def test_matches_scipy_on_continuous_law(self):
        x = np.random.default_rng(1).uniform(size=300)
        cdf = lambda t: np.clip(np.asarray(t), 0.0, 1.0)  # noqa: E731
        assert ks_statistic(x, cdf) == pytest.approx(stats.kstest(x, cdf).statistic, abs=1e-12)


class TestSamplesToCsv:
    """Tests for the sample dump."""

    def test_rows(self, tmp_path):
        samples = FptSampleSet(np.array([0.5, np.inf]), 1, SimConfig())
        path = samples_to_csv(samples, tmp_path / 'out' / 'samples.csv', header=['seed=0'])
        assert path.read_text().splitlines() == [
            '# seed=0',
            'path_index,fpt,censored',
            '0,0.5,0',
            '1,inf,1',
        ]


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
