"""
End-to-end tests for the reflectfpt command line.
"""

import json

import pytest
import yaml

from reflectfpt.cli import build_target, closed_form_density, main
from reflectfpt.config import Target
from reflectfpt.errors import ConfigError


def read_json(path):
    return json.loads(path.read_text())


class TestList:
    def test_list_presets(self, capsys):
        assert main(['list']) == 0
        out = capsys.readouterr().out
        assert 'example1' in out
        assert 'gamma_counterexample' in out


class TestDirect:
    """Tests for the direct subcommand."""

    def test_direct_bm(self, tmp_path):
        assert main(['direct', '--preset', 'direct_bm', '--out', str(tmp_path)]) == 0
        out = tmp_path / 'direct_bm'
        for name in ('laplace.csv', 'density.csv', 'moments.csv', 'summary.json'):
            assert (out / name).exists()
        summary = read_json(out / 'summary.json')
        assert summary['mean'] == pytest.approx(1.0)
        assert summary['variance'] == pytest.approx(2.0 / 3.0)
        assert summary['provenance']['density'] == 'analytic_spectral'
        assert (out / 'laplace.csv').read_text().startswith('# config: ')

    def test_rerun_is_byte_identical(self, tmp_path):
        main(['direct', '--preset', 'direct_bm', '--out', str(tmp_path / 'one')])
        main(['direct', '--preset', 'direct_bm', '--out', str(tmp_path / 'two')])
        for name in ('laplace.csv', 'moments.csv', 'summary.json'):
            first = (tmp_path / 'one' / 'direct_bm' / name).read_bytes()
            assert first == (tmp_path / 'two' / 'direct_bm' / name).read_bytes()

    def test_output_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv('REFLECTFPT_OUT', str(tmp_path))
        assert main(['direct', '--preset', 'direct_bm']) == 0
        assert (tmp_path / 'direct_bm' / 'summary.json').exists()

    def test_wrong_kind(self, tmp_path):
        assert main(['direct', '--preset', 'example1', '--out', str(tmp_path)]) == 2


class TestIfpt:
    """Tests for the inverse subcommands."""

    def test_example1_from_yaml(self, tmp_path):
        config = {
            'kind': 'ifpt', 'name': 'small_example1',
            'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
            'target': {'preset': 'example1'},
            'numerics': {'n_points': 21, 'cosine_terms': 1024},
        }
        path = tmp_path / 'exp.yaml'
        path.write_text(yaml.safe_dump(config))
        assert main(['ifpt', '--config', str(path), '--out', str(tmp_path)]) == 0
        summary = read_json(tmp_path / 'small_example1' / 'summary.json')
        assert summary['solution']['status'] == 'SOLVED'
        assert summary['max_interior_error'] <= 1e-3
        assert summary['round_trip_residual'] <= 1e-9
        assert summary['mean_tau'] == pytest.approx(2.0 / 3.0, abs=1e-6)
        assert (tmp_path / 'small_example1' / 'density.csv').exists()

    def test_gamma_counterexample(self, tmp_path):
        assert main(['ifpt', '--preset', 'gamma_counterexample', '--out', str(tmp_path)]) == 0
        summary = read_json(tmp_path / 'gamma_counterexample' / 'summary.json')
        assert summary['solution']['status'] == 'NO_SOLUTION'
        assert 'second moment nonpositive' in summary['solution']['reasons']
        assert not (tmp_path / 'gamma_counterexample' / 'density.csv').exists()

    def test_verify_no_solution_expectation(self, tmp_path):
        assert main(['verify', '--preset', 'gamma_counterexample', '--out', str(tmp_path)]) == 0
        verdicts = read_json(tmp_path / 'gamma_counterexample' / 'verdicts.json')
        assert verdicts['passed'] is True

    def test_missing_source(self):
        with pytest.raises(SystemExit):
            main(['ifpt'])

    def test_missing_config_file(self, tmp_path):
        assert main(['ifpt', '--config', str(tmp_path / 'absent.yaml')]) == 2


class TestVerify:
    """Tests for the verify subcommand."""

    def test_point_mass(self, tmp_path):
        assert main(['verify', '--preset', 'trivial_point_mass', '--paths', '500', '--out', str(tmp_path)]) == 0
        out = tmp_path / 'trivial_point_mass'
        verdicts = read_json(out / 'verdicts.json')
        assert verdicts['config']['numerics']['n_paths'] == 500
        assert {v['check'] for v in verdicts['verdicts']} == {'mc_all_zero', 'ks_distance'}
        lines = (out / 'samples.csv').read_text().splitlines()
        assert lines[0].startswith('# config: ')
        assert len(lines) == 502

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ['verify', '--preset', 'direct_bm', '--paths', '300', '--dt', '0.01']
        codes = [main(args + ['--out', str(tmp_path / run)]) for run in ('one', 'two')]
        assert codes[0] == codes[1]
        for name in ('samples.csv', 'verdicts.json'):
            first = (tmp_path / 'one' / 'direct_bm' / name).read_bytes()
            assert first == (tmp_path / 'two' / 'direct_bm' / name).read_bytes()

    @pytest.mark.slow
    def test_example1_acceptance(self, tmp_path):
        assert main(['verify', '--preset', 'example1', '--out', str(tmp_path), '-w', '2']) == 0


class TestBuilders:
    """Tests for target and closed-form lookup."""

    def test_width_checks(self):
        with pytest.raises(ConfigError):
            build_target(Target(preset='example3'), 2.0)

    def test_closed_form_on_shifted_support(self):
        density = closed_form_density(Target(preset='example3'), 1.0, 2.0)
        assert density(1.5) == pytest.approx(2.0)
        assert closed_form_density(Target(preset='gamma'), 0.0, 1.0) is None


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
