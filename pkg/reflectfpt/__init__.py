"""
reflectfpt: first-passage times of reflected diffusions.

Direct problem (FPT transform, density and moments from a known start),
inverse problem (initial density from a target FPT law), conjugation of
general diffusions to reflected BM, and a Monte Carlo oracle.
"""

from reflectfpt.errors import (
    ConfigError,
    FptDomainError,
    RangeGuardError,
    ReflectFptError,
)

__version__ = '0.1.0'

__all__ = ['ConfigError', 'FptDomainError', 'RangeGuardError', 'ReflectFptError', '__version__']
