"""Exception hierarchy shared by every module."""


class FsoArqError(Exception):
    """Base class for all package errors."""


class DomainError(FsoArqError, ValueError):
    """An argument lies outside the domain of the function."""


class ConfigError(FsoArqError, ValueError):
    """A configuration object (contour, scenario file, ...) is invalid."""


class NumericalError(FsoArqError, ArithmeticError):
    """A quadrature or refinement loop failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class UnsupportedConfigurationError(FsoArqError):
    """The request is valid but outside what an engine is willing to run."""
