"""
Error and warning types shared by every reflectfpt module.

Library code raises these; the CLI turns them into `Error: <message>` lines
and a non-zero exit status.
"""


class ReflectFptError(Exception):
    """Base class for all reflectfpt failures."""


class FptDomainError(ReflectFptError, ValueError):
    """An argument lies outside the documented domain (e.g. x not in [a, S])."""


class RangeGuardError(ReflectFptError, ArithmeticError):
    """A closed form would overflow or underflow double precision."""


class SingularBvpError(ReflectFptError):
    """The assembled boundary-value system is singular or u(S) vanishes."""


class DegenerateCoefficientError(ReflectFptError):
    """The diffusion coefficient vanishes inside the interval."""


class MethodUnsuitableError(ReflectFptError):
    """The requested Laplace inversion method cannot handle the transform."""


class QuadratureError(ReflectFptError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConfigError(ReflectFptError, ValueError):
    """Experiment configuration is invalid or names an unknown preset."""


class SeriesConvergenceWarning(RuntimeWarning):
    """A truncated series did not reach its tolerance."""


class CensoringWarning(RuntimeWarning):
    """Too many simulated paths hit the horizon without crossing."""


class DegenerateEndpointWarning(RuntimeWarning):
    """The diffusion coefficient vanishes at an endpoint; accuracy drops there."""
