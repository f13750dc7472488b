#!/usr/bin/env python3
"""
reflectfpt command line.

Subcommands:
    direct      FPT transform, density and moment tables for a reflected diffusion
    ifpt        Symmetric inverse first-passage solve (driftless BM)
    jump        Inverse problem with catastrophes at rate lam
    conjugated  Inverse problem for a diffusion conjugated to BM
    verify      Cross-check closed forms, BVP and Monte Carlo; exit 1 on failure
    list        Show preset names

Usage:
    python3 -m reflectfpt.cli ifpt --preset example1
    python3 -m reflectfpt.cli verify --preset example1 --paths 10000 --dt 1e-4 -w 4
    python3 -m reflectfpt.cli direct --config my_experiment.yaml --out results/

Environment:
    REFLECTFPT_OUT        default output directory (results)
    REFLECTFPT_LOG_LEVEL  logging level when --verbose is not given (INFO)
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from reflectfpt import analytic_bm, bvp_engine, conjugation, ifpt_solver, montecarlo, presets
from reflectfpt.config import ExperimentConfig, Target, get_preset, load_config, PRESETS
from reflectfpt.domain import (
    Constant,
    DensityOnInterval,
    DiffusionSpec,
    GridDensitySampler,
    PointMass,
    ReflectedBmSpec,
    TransformFn,
    UniformSampler,
)
from reflectfpt.errors import ConfigError, ReflectFptError
from reflectfpt.laplace_numerics import InversionConfig, cdf_from_transform, invert
from reflectfpt.reports import config_line, write_csv, write_json

logger = logging.getLogger('reflectfpt')

BVP_AGREEMENT_TOL = 1e-6
ROUND_TRIP_TOL = 1e-9
MC_SIGMA_BAND = 3.0
CDF_GRID_POINTS = 301
# Stehfest order usable on double-precision BVP transforms.
FLOAT_STEHFEST_ORDER = 14


def default_out_dir() -> str:
    return os.environ.get('REFLECTFPT_OUT', 'results')


# ---------------------------------------------------------------------------
# Building blocks from a config
# ---------------------------------------------------------------------------

def _require_unit_width(target: Target, width: float) -> None:
    if abs(width - 1.0) > 1e-12:
        raise ConfigError(f"target {target.preset} is defined on an interval of width 1, got {width}")


def build_target(target: Target, width: float) -> TransformFn:
    """Target FPT transform for a preset, on an interval of the given width."""
    name = target.preset
    if name == 'example1':
        return presets.uniform_fhat(width)
    if name == 'example2':
        return presets.sine_fhat(width)
    if name == 'example3':
        _require_unit_width(target, width)
        return presets.triangular_fhat()
    if name == 'example4':
        _require_unit_width(target, width)
        return presets.beta_fhat()
    if name == 'example5':
        return presets.catastrophe_fhat(target.lam, width)
    if name == 'g2k':
        _require_unit_width(target, width)
        return ifpt_solver.g2k_family(target.k)[0]
    if name == 'gamma':
        return presets.gamma_fhat(target.lam, target.alpha)
    if name == 'point_mass':
        return presets.point_mass_fhat()
    return presets.rational_fhat(target.numerator, target.denominator)


def closed_form_density(target: Target, lo: float, hi: float) -> Optional[DensityOnInterval]:
    """The known solution on [lo, hi] for the worked examples, if there is one."""
    width = hi - lo
    if target.preset in ('example1', 'example5'):
        return presets.uniform_density(lo, hi)
    if target.preset == 'example2':
        sine = presets.sine_density(width)
        return DensityOnInterval(lo, hi, lambda x: sine(x - lo), name='sine')
    if abs(width - 1.0) > 1e-12:
        return None
    base = {
        'example3': presets.triangular_density,
        'example4': presets.beta_density,
        'g2k': lambda: ifpt_solver.g2k_family(target.k)[1],
    }.get(target.preset)
    if base is None:
        return None
    density = base()
    return DensityOnInterval(lo, hi, lambda x: density(x - lo), name=density.name)


def build_diffusion(cfg: ExperimentConfig) -> DiffusionSpec:
    g = cfg.geometry
    if g.drift_model == 'ou':
        return DiffusionSpec.reflected_ou(g.kappa, g.sigma, g.a, g.b)
    if g.sigma == 1.0:
        return DiffusionSpec.reflected_bm(g.mu, g.a, g.b)
    return DiffusionSpec(Constant(g.mu), Constant(g.sigma), g.a, g.b, name=f'bm(mu={g.mu}, sigma={g.sigma})')


def _inversion(cfg: ExperimentConfig) -> InversionConfig:
    return InversionConfig(order=cfg.numerics.stehfest_order)


def _sim_config(cfg: ExperimentConfig) -> montecarlo.SimConfig:
    n = cfg.numerics
    return montecarlo.SimConfig(dt=n.dt, horizon=n.horizon, n_paths=n.n_paths, seed=n.seed,
                                batch_size=n.batch_size, workers=n.workers)


def _dump(cfg: ExperimentConfig) -> dict:
    return cfg.model_dump()


def _x_grid(cfg: ExperimentConfig, lo: float, hi: float) -> List[float]:
    if cfg.numerics.x_grid is not None:
        return list(cfg.numerics.x_grid)
    return [lo, 0.5 * (lo + hi), hi]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_direct(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Tables of f_hat(theta), the FPT density and T1/T2/Var with the engine behind each column."""
    g = cfg.geometry
    spec = build_diffusion(cfg)
    bm = spec.as_bm()
    below = g.direction == 'from_below'
    analytic = bm is not None and below
    x, S = g.x, g.S
    config = _dump(cfg)

    def bvp_laplace(theta):
        if below:
            return bvp_engine.laplace_via_bvp_below(spec, S, theta, x)
        return bvp_engine.laplace_via_bvp_above(spec, S, theta, x)

    rows = []
    for theta in cfg.numerics.theta_grid:
        rows.append((theta, analytic_bm.laplace_fpt_below(bm, x, S, theta) if analytic else None,
                     bvp_laplace(theta)))
    write_csv(out_dir / 'laplace.csv', ['theta', 'fhat_analytic', 'fhat_bvp'], rows, config)

    if analytic and analytic_bm.is_small_drift(bm, x, S):
        density_source = 'analytic_spectral'
        values = [analytic_bm.spectral_density(x - g.a, S - g.a, t) for t in cfg.numerics.t_grid]
    elif analytic:
        density_source = 'analytic_laplace+stehfest'
        F = analytic_bm.laplace_transform_fn(bm, x, S)
        values = [invert(F, t, _inversion(cfg)) if x < S else 0.0 for t in cfg.numerics.t_grid]
    else:
        density_source = 'bvp+stehfest'
        F = TransformFn(lambda th: 1.0 if th == 0 else bvp_laplace(th), precise=False, name='bvp')
        inv = InversionConfig(order=FLOAT_STEHFEST_ORDER)
        values = [invert(F, t, inv) if x != S else 0.0 for t in cfg.numerics.t_grid]
    write_csv(out_dir / 'density.csv', ['t', 'density'], zip(cfg.numerics.t_grid, values), config)

    lo, hi = (g.a, S) if below else (S, g.b)
    moment_rows = []
    for xi in _x_grid(cfg, lo, hi):
        if analytic:
            t1, var = analytic_bm.fpt_moment_pair(bm, xi, S)
            t2 = analytic_bm.second_moment_fpt(bm, xi, S)
        else:
            t1 = bvp_engine.moments_via_bvp(spec, S, 1, xi, from_below=below)
            t2 = bvp_engine.moments_via_bvp(spec, S, 2, xi, from_below=below)
            var = max(t2 - t1 * t1, 0.0)
        moment_rows.append((xi, t1, t2, var))
    write_csv(out_dir / 'moments.csv', ['x', 'T1', 'T2', 'Var'], moment_rows, config)

    if analytic:
        mean, var = analytic_bm.fpt_moment_pair(bm, x, S)
    else:
        mean = bvp_engine.moments_via_bvp(spec, S, 1, x, from_below=below)
        var = max(bvp_engine.moments_via_bvp(spec, S, 2, x, from_below=below) - mean ** 2, 0.0)
    moment_source = 'analytic' if analytic else 'bvp'
    summary = {
        'config': config,
        'mean': mean,
        'variance': var,
        'provenance': {
            'fhat_analytic': 'analytic' if analytic else 'unavailable',
            'fhat_bvp': 'bvp',
            'density': density_source,
            'moments': moment_source,
        },
    }
    write_json(out_dir / 'summary.json', summary)
    return summary


def _density_rows(solution: ifpt_solver.IfptSolution, closed: Optional[DensityOnInterval]):
    if solution.recovered is None:
        return []
    return [(x, g, closed(x) if closed is not None else None)
            for x, g in zip(solution.recovered.grid, solution.recovered.values)]


def _write_solution(cfg: ExperimentConfig, out_dir: Path, solution: ifpt_solver.IfptSolution,
                    closed: Optional[DensityOnInterval], extra: dict) -> dict:
    config = _dump(cfg)
    rows = [(t, solution.ghat(t)) for t in cfg.numerics.theta_grid]
    write_csv(out_dir / 'ghat.csv', ['theta', 'ghat'], rows, config)
    if solution.recovered is not None:
        write_csv(out_dir / 'density.csv', ['x', 'g_recovered', 'g_closed_form'],
                  _density_rows(solution, closed), config)
    summary = {'config': config, 'solution': ifpt_solver.solution_to_dict(solution)}
    if solution.diagnostics.compatibility is not None:
        summary['mean_tau'] = solution.diagnostics.compatibility.mean_tau
    if closed is not None and solution.recovered is not None:
        interior = solution.recovered.grid[2:-2]
        errors = [abs(solution.recovered.density(x) - closed(x)) for x in interior]
        summary['max_interior_error'] = max(errors)
    summary.update(extra)
    write_json(out_dir / 'summary.json', summary)
    return summary


def run_ifpt(cfg: ExperimentConfig) -> Tuple[ifpt_solver.IfptSolution, TransformFn]:
    g = cfg.geometry
    below = g.direction == 'from_below'
    width = (g.S - g.a) if below else (g.b - g.S)
    fhat = build_target(cfg.target, width)
    problem = ifpt_solver.IfptProblem(ReflectedBmSpec(g.mu, g.a, g.b), g.S, fhat, g.direction)
    solve = ifpt_solver.solve_symmetric if below else ifpt_solver.solve_symmetric_above
    return solve(problem, n_points=cfg.numerics.n_points,
                 n_terms=cfg.numerics.cosine_terms), fhat


def report_ifpt(cfg: ExperimentConfig, out_dir: Path, solution: ifpt_solver.IfptSolution,
                fhat: TransformFn) -> dict:
    g = cfg.geometry
    extra = {}
    if solution.valid and g.direction == 'from_below':
        residual = ifpt_solver.fhat_residual(solution.ghat, fhat, ReflectedBmSpec(g.mu, g.a, g.b),
                                             g.S, cfg.numerics.theta_grid)
        extra['round_trip_residual'] = max(residual.values())
    closed = closed_form_density(cfg.target, *solution.support)
    return _write_solution(cfg, out_dir, solution, closed, extra)


def cmd_ifpt(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Solve, then report g_hat, the recovered density and the diagnostics."""
    return report_ifpt(cfg, out_dir, *run_ifpt(cfg))


def run_jump(cfg: ExperimentConfig) -> Tuple[ifpt_solver.IfptSolution, TransformFn]:
    g = cfg.geometry
    if g.a != 0.0:
        raise ConfigError("the catastrophe variant is set on a = 0")
    fbar = build_target(cfg.target, g.S)
    solution = ifpt_solver.jump_solve_symmetric(fbar, cfg.target.lam, g.S,
                                                n_points=cfg.numerics.n_points,
                                                n_terms=cfg.numerics.cosine_terms)
    return solution, fbar


def report_jump(cfg: ExperimentConfig, out_dir: Path, solution: ifpt_solver.IfptSolution,
                fbar: TransformFn) -> dict:
    extra = {'lam': cfg.target.lam}
    if solution.valid:
        extra['round_trip_residual'] = max(
            abs(ifpt_solver.jump_forward(solution.ghat, cfg.target.lam, cfg.geometry.S, t) - fbar(t))
            for t in cfg.numerics.theta_grid
        )
    closed = closed_form_density(cfg.target, *solution.support)
    return _write_solution(cfg, out_dir, solution, closed, extra)


def cmd_jump(cfg: ExperimentConfig, out_dir: Path) -> dict:
    return report_jump(cfg, out_dir, *run_jump(cfg))


def run_conjugated(cfg: ExperimentConfig):
    g = cfg.geometry
    cmap = conjugation.catalog(g.catalog, a=g.a, b=g.b, **g.catalog_params)
    width = float(cmap.V(g.S) - cmap.V(g.a))
    fhat = build_target(cfg.target, width)
    solution = conjugation.solve_conjugated_symmetric(cmap, g.S, fhat, n_points=cfg.numerics.n_points,
                                                      n_terms=cfg.numerics.cosine_terms)
    return solution, cmap


def report_conjugated(cfg: ExperimentConfig, out_dir: Path, solution: ifpt_solver.IfptSolution,
                      cmap: conjugation.ConjugationMap) -> dict:
    closed = None
    if cfg.target.preset == 'example1':
        closed = conjugation.conjugated_uniform_density(cmap, cfg.geometry.S)
    extra = {'catalog': cmap.name, 'image': {'a': float(cmap.V(cmap.a)), 'S': float(cmap.V(cfg.geometry.S)),
                                             'drift': cmap.drift}}
    return _write_solution(cfg, out_dir, solution, closed, extra)


def cmd_conjugated(cfg: ExperimentConfig, out_dir: Path) -> dict:
    """Solve in V-coordinates and report the density mapped back to [a, S]."""
    return report_conjugated(cfg, out_dir, *run_conjugated(cfg))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

class Verdicts:
    """Accumulates named pass/fail checks for verdicts.json."""

    def __init__(self):
        self.items = []

    def check(self, name: str, value: float, threshold: float, passed: Optional[bool] = None) -> bool:
        ok = bool(value <= threshold) if passed is None else bool(passed)
        self.items.append({'check': name, 'value': value, 'threshold': threshold, 'passed': ok})
        logger.info(f"{'PASS' if ok else 'FAIL'} {name}: {value:.4g} (threshold {threshold:.4g})")
        return ok

    @property
    def passed(self) -> bool:
        return all(item['passed'] for item in self.items)


def _interpolated_cdf(F: TransformFn, samples: montecarlo.FptSampleSet, cfg: ExperimentConfig):
    """CDF of the law with transform F, inverted on a grid and interpolated."""
    crossed = samples.crossed
    t_max = float(crossed.max()) if crossed.size else 1.0
    ts = np.linspace(0.0, max(t_max, 1e-9), CDF_GRID_POINTS)
    cdf = cdf_from_transform(F, ts, _inversion(cfg))
    return lambda t: np.interp(t, ts, cdf, left=0.0, right=cdf[-1])


def _check_mean(verdicts: Verdicts, samples: montecarlo.FptSampleSet, expected: float) -> None:
    if expected == 0.0:
        verdicts.check('mc_all_zero', float(np.max(samples.times)), 0.0)
        return
    band = MC_SIGMA_BAND * samples.std_error()
    verdicts.check('mc_mean_within_3se', abs(samples.mean() - expected), band)


def _check_ks(verdicts: Verdicts, samples, target_cdf, cfg: ExperimentConfig) -> None:
    verdicts.check('ks_distance', montecarlo.ks_statistic(samples, target_cdf), cfg.numerics.ks_tol)


def _verify_direct(cfg: ExperimentConfig, out_dir: Path, verdicts: Verdicts):
    g = cfg.geometry
    if g.direction != 'from_below':
        raise ConfigError("verify simulates first passage from below only")
    summary = cmd_direct(cfg, out_dir)
    spec = build_diffusion(cfg)
    bm = spec.as_bm()
    if bm is not None:
        worst = max(abs(analytic_bm.laplace_fpt_below(bm, g.x, g.S, t)
                        - bvp_engine.laplace_via_bvp_below(spec, g.S, t, g.x))
                    for t in cfg.numerics.theta_grid)
        verdicts.check('analytic_vs_bvp', worst, BVP_AGREEMENT_TOL)
    samples = montecarlo.sample_fpt(spec, PointMass(g.x), g.S, _sim_config(cfg))
    _check_mean(verdicts, samples, summary['mean'])
    if bm is not None and analytic_bm.is_small_drift(bm, g.x, g.S):
        _check_ks(verdicts, samples, lambda t: analytic_bm.spectral_cdf(g.x - g.a, g.S - g.a, t), cfg)
    return samples


def _verify_ifpt(cfg: ExperimentConfig, out_dir: Path, verdicts: Verdicts):
    if cfg.kind == 'ifpt':
        solution, F = run_ifpt(cfg)
        summary = report_ifpt(cfg, out_dir, solution, F)
    else:
        solution, F = run_jump(cfg)
        summary = report_jump(cfg, out_dir, solution, F)
    expected = cfg.expect == 'solution'
    verdicts.check('status_matches_expectation', 0.0 if solution.valid == expected else 1.0, 0.0)
    if not solution.valid or cfg.geometry.direction != 'from_below':
        return None
    verdicts.check('round_trip', summary['round_trip_residual'], ROUND_TRIP_TOL)
    g = cfg.geometry
    init = GridDensitySampler.from_density(solution.density)
    spec = DiffusionSpec.reflected_bm(g.mu, g.a, g.b)
    if cfg.kind == 'ifpt':
        samples = montecarlo.sample_fpt(spec, init, g.S, _sim_config(cfg))
    else:
        samples = montecarlo.sample_fpt_with_catastrophe(cfg.target.lam, spec, init, g.S, _sim_config(cfg))
    _check_ks(verdicts, samples, _interpolated_cdf(F, samples, cfg), cfg)
    return samples


def _verify_conjugated(cfg: ExperimentConfig, out_dir: Path, verdicts: Verdicts):
    g = cfg.geometry
    solution, cmap = run_conjugated(cfg)
    report_conjugated(cfg, out_dir, solution, cmap)
    verdicts.check('status_matches_expectation',
                   0.0 if solution.valid == (cfg.expect == 'solution') else 1.0, 0.0)
    if cfg.target.preset == 'example1':
        mass = conjugation.conjugated_uniform_density(cmap, g.S).mass()
        verdicts.check('conjugated_uniform_mass', abs(mass - 1.0), 1e-8)
    if g.x is None:
        return None
    va = float(cmap.V(g.a))
    samples = montecarlo.sample_fpt(cmap.diffusion(), PointMass(g.x), g.S, _sim_config(cfg))
    vx, vs = float(cmap.V(g.x)) - va, float(cmap.V(g.S)) - va
    _check_ks(verdicts, samples, lambda t: analytic_bm.spectral_cdf(vx, vs, t), cfg)
    return samples


def _verify_montecarlo(cfg: ExperimentConfig, out_dir: Path, verdicts: Verdicts):
    g = cfg.geometry
    spec = DiffusionSpec.reflected_bm(g.mu, g.a, g.b)
    sim = _sim_config(cfg)
    preset = cfg.target.preset
    if preset == 'point_mass':
        samples = montecarlo.sample_fpt(spec, PointMass(g.S), g.S, sim)
        _check_mean(verdicts, samples, 0.0)
        target_cdf = lambda t: np.where(np.asarray(t) >= 0, 1.0, 0.0)  # noqa: E731
    elif preset == 'example1':
        samples = montecarlo.sample_fpt(spec, UniformSampler(g.a, g.S), g.S, sim)
        target_cdf = lambda t: presets.uniform_start_cdf(g.S - g.a, t)  # noqa: E731
    elif preset == 'example5' and g.a == 0.0:
        samples = montecarlo.sample_fpt_with_catastrophe(cfg.target.lam, spec, UniformSampler(0.0, g.S), g.S, sim)
        target_cdf = lambda t: presets.catastrophe_cdf(cfg.target.lam, g.S, t)  # noqa: E731
    else:
        raise ConfigError(f"montecarlo_verify has no closed-form law for target {preset}")
    _check_ks(verdicts, samples, target_cdf, cfg)
    return samples


def cmd_verify(cfg: ExperimentConfig, out_dir: Path) -> Tuple[dict, bool]:
    """Run the acceptance checks for a config; returns (report, passed)."""
    verdicts = Verdicts()
    runner = {
        'direct': _verify_direct,
        'ifpt': _verify_ifpt,
        'ifpt_jump': _verify_ifpt,
        'conjugated': _verify_conjugated,
        'montecarlo_verify': _verify_montecarlo,
    }[cfg.kind]
    samples = runner(cfg, out_dir, verdicts)
    config = _dump(cfg)
    if samples is not None:
        montecarlo.samples_to_csv(samples, out_dir / 'samples.csv',
                                  header=[f"config: {config_line(config)}"])
    report = {'config': config, 'verdicts': verdicts.items, 'passed': verdicts.passed}
    write_json(out_dir / 'verdicts.json', report)
    return report, verdicts.passed


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else os.environ.get('REFLECTFPT_LOG_LEVEL', 'INFO').upper()
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')


def _add_common(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--preset', help='Named preset (see `list`)')
    source.add_argument('--config', help='YAML or JSON experiment file')
    parser.add_argument('--out', default=None,
                        help='Output directory (default: $REFLECTFPT_OUT or results)')
    parser.add_argument('--seed', type=int, default=None, help='Override numerics.seed')
    parser.add_argument('--paths', type=int, default=None, help='Override numerics.n_paths')
    parser.add_argument('--dt', type=float, default=None, help='Override numerics.dt')
    parser.add_argument('-w', '--workers', type=int, default=None,
                        help='Parallel Monte Carlo workers (default: 1)')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='reflectfpt',
        description='First-passage times of reflected diffusions: direct and inverse problems'
    )
    sub = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (('direct', 'FPT transform, density and moments'),
                            ('ifpt', 'Symmetric inverse first-passage solve'),
                            ('jump', 'Inverse problem with catastrophes'),
                            ('conjugated', 'Inverse problem for a conjugated diffusion'),
                            ('verify', 'Analytic / BVP / Monte Carlo acceptance checks')):
        _add_common(sub.add_parser(name, help=help_text))
    sub.add_parser('list', help='List presets')
    return parser


def resolve_config(args) -> ExperimentConfig:
    cfg = get_preset(args.preset) if args.preset else load_config(args.config)
    return cfg.with_overrides(seed=args.seed, n_paths=args.paths, dt=args.dt, workers=args.workers)


_COMMANDS = {
    'direct': cmd_direct,
    'ifpt': cmd_ifpt,
    'jump': cmd_jump,
    'conjugated': cmd_conjugated,
}

_KINDS = {'direct': ('direct',), 'ifpt': ('ifpt',), 'jump': ('ifpt_jump',), 'conjugated': ('conjugated',)}


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entrypoint."""
    args = build_parser().parse_args(argv)
    if args.command == 'list':
        for name, data in PRESETS.items():
            print(f"{name:28s} {data['kind']}")
        return 0

    _setup_logging(args.verbose)
    try:
        cfg = resolve_config(args)
        out_dir = Path(args.out or default_out_dir()) / cfg.name
        if args.command == 'verify':
            report, passed = cmd_verify(cfg, out_dir)
            print(f"{cfg.name}: {'PASS' if passed else 'FAIL'} "
                  f"({sum(v['passed'] for v in report['verdicts'])}/{len(report['verdicts'])} checks)")
            return 0 if passed else 1
        if cfg.kind not in _KINDS[args.command]:
            raise ConfigError(f"config kind '{cfg.kind}' does not fit the '{args.command}' command")
        summary = _COMMANDS[args.command](cfg, out_dir)
        status = summary.get('solution', {}).get('status')
        print(f"{cfg.name}: results in {out_dir}" + (f" ({status})" if status else ''))
        return 0
    except ReflectFptError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
