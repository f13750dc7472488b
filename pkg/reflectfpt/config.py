"""
Experiment configuration: schema, YAML/JSON loading and the named presets.

Every section rejects unknown keys. The resolved config (after CLI overrides)
is embedded in every report file, so a run can be reproduced from its output.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from reflectfpt.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_THETA_GRID = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]
DEFAULT_T_GRID = [0.05, 0.1, 0.2, 0.5, 1.0, 2.0]


class Geometry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    a: float = 0.0
    b: float = 2.0
    S: float = 1.0
    mu: float = 0.0
    x: Optional[float] = None
    direction: Literal['from_below', 'from_above'] = 'from_below'
    drift_model: Literal['constant', 'ou'] = 'constant'
    kappa: float = 1.0
    sigma: float = Field(1.0, gt=0)
    catalog: Optional[str] = None
    catalog_params: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode='after')
    def _ordered(self):
        if not self.a < self.b:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not self.a <= self.S <= self.b:
            raise ValueError(f"need a <= S <= b, got a={self.a}, S={self.S}, b={self.b}")
        if self.x is not None and not self.a <= self.x <= self.b:
            raise ValueError(f"start x={self.x} outside [a, b]")
        return self


class Target(BaseModel):
    model_config = ConfigDict(extra='forbid')

    preset: Literal['example1', 'example2', 'example3', 'example4', 'example5',
                    'g2k', 'gamma', 'point_mass', 'custom_rational']
    k: int = Field(1, ge=1)
    lam: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, gt=0)
    numerator: List[float] = Field(default_factory=lambda: [1.0])
    denominator: List[float] = Field(default_factory=lambda: [1.0])


class Numerics(BaseModel):
    model_config = ConfigDict(extra='forbid')

    dt: float = Field(1e-4, gt=0)
    n_paths: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    horizon: Optional[float] = Field(None, gt=0)
    batch_size: int = Field(8192, ge=1)
    workers: int = Field(1, ge=1)
    theta_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_THETA_GRID))
    t_grid: List[float] = Field(default_factory=lambda: list(DEFAULT_T_GRID))
    x_grid: Optional[List[float]] = None
    n_points: int = Field(201, ge=11)
    cosine_terms: int = Field(4096, ge=16)
    stehfest_order: int = Field(64, ge=8)
    ks_tol: float = Field(0.02, gt=0)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['direct', 'ifpt', 'ifpt_jump', 'conjugated', 'montecarlo_verify']
    name: str
    geometry: Geometry = Field(default_factory=Geometry)
    target: Optional[Target] = None
    numerics: Numerics = Field(default_factory=Numerics)
    expect: Literal['solution', 'no_solution'] = 'solution'

    @model_validator(mode='after')
    def _complete(self):
        if self.kind in ('ifpt', 'ifpt_jump', 'conjugated', 'montecarlo_verify') and self.target is None:
            raise ValueError(f"kind '{self.kind}' needs a target section")
        if self.kind == 'conjugated' and self.geometry.catalog is None:
            raise ValueError("kind 'conjugated' needs geometry.catalog")
        if self.kind == 'direct' and self.geometry.x is None:
            raise ValueError("kind 'direct' needs geometry.x")
        return self

    def with_overrides(self, seed: Optional[int] = None, n_paths: Optional[int] = None,
                       dt: Optional[float] = None, workers: Optional[int] = None) -> 'ExperimentConfig':
        """Copy with CLI overrides merged into numerics (validated again)."""
        updates = {k: v for k, v in
                   {'seed': seed, 'n_paths': n_paths, 'dt': dt, 'workers': workers}.items()
                   if v is not None}
        if not updates:
            return self
        data = self.model_dump()
        data['numerics'].update(updates)
        return parse_config(data)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e}")


def load_config(path) -> ExperimentConfig:
    """
    Load an experiment config from a YAML or JSON file.

    Args:
        path: File path; .json is parsed as JSON, anything else as YAML.

    Returns:
        Validated ExperimentConfig.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == '.json' else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path} does not hold a mapping")
    logger.debug(f"loaded config {path}")
    return parse_config(data)


PRESETS: Dict[str, dict] = {
    'example1': {
        'kind': 'ifpt', 'name': 'example1',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'example1'},
    },
    'example2': {
        'kind': 'ifpt', 'name': 'example2',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'example2'},
    },
    'example3': {
        'kind': 'ifpt', 'name': 'example3',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'example3'},
    },
    'example4': {
        'kind': 'ifpt', 'name': 'example4',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'example4'},
    },
    'example5': {
        'kind': 'ifpt_jump', 'name': 'example5',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'example5', 'lam': 0.5},
    },
    'g2k': {
        'kind': 'ifpt', 'name': 'g2k',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'g2k', 'k': 2},
    },
    'gamma_counterexample': {
        'kind': 'ifpt', 'name': 'gamma_counterexample',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'gamma', 'lam': 1.0, 'alpha': 1.0},
        'expect': 'no_solution',
    },
    'trivial_point_mass': {
        'kind': 'montecarlo_verify', 'name': 'trivial_point_mass',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0},
        'target': {'preset': 'point_mass'},
    },
    'direct_bm': {
        'kind': 'direct', 'name': 'direct_bm',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0, 'mu': 0.0, 'x': 0.0},
        'numerics': {'x_grid': [0.0, 0.25, 0.5, 0.75, 1.0]},
    },
    'reflected_ou': {
        'kind': 'direct', 'name': 'reflected_ou',
        'geometry': {'a': 0.0, 'S': 1.0, 'b': 2.0, 'x': 0.2,
                     'drift_model': 'ou', 'kappa': 1.0, 'sigma': 1.0},
        'numerics': {'x_grid': [0.0, 0.2, 0.5, 0.8, 1.0]},
    },
    'cir_conjugation': {
        'kind': 'conjugated', 'name': 'cir_conjugation',
        'geometry': {'a': 0.25, 'S': 1.0, 'b': 4.0, 'x': 0.5, 'catalog': 'cir_feller'},
        'target': {'preset': 'example1'},
    },
    'wright_fisher_conjugation': {
        'kind': 'conjugated', 'name': 'wright_fisher_conjugation',
        'geometry': {'a': 0.1, 'S': 0.5, 'b': 0.9, 'x': 0.25, 'catalog': 'wright_fisher'},
        'target': {'preset': 'example1'},
    },
}


def preset_names() -> List[str]:
    return list(PRESETS)


def get_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; known: {', '.join(PRESETS)}")
    return parse_config(PRESETS[name])
