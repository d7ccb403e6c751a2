"""Semantic exception hierarchy shared across the package."""


class CogcapError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CogcapError, ValueError):
    """Inputs violate a contract: bad domain, shape, or configuration."""


class QuadratureError(CogcapError, ArithmeticError):
    """Numerical integration failed to converge to the requested tolerance."""


class BracketError(CogcapError, ArithmeticError):
    """Root finding could not bracket a sign change within the search budget."""


class ConvergenceError(CogcapError, ArithmeticError):
    """An iterative solver stopped without meeting its convergence target."""


class ValidationFailure(CogcapError):
    """A Monte Carlo validation report contains failed checks."""
