"""Exception types shared across the package.

The CLI maps ConfigurationError to exit code 2 and DataError (and its
subclasses) to exit code 3; everything else is a bug.
"""


class WavesieveError(Exception):
    """Base class for all package errors."""


class ConfigurationError(WavesieveError):
    """Invalid parameter, option, or config file content."""


class ResourceError(ConfigurationError):
    """A requested computation exceeds a configured budget."""


class DataError(WavesieveError):
    """Problem with the data itself rather than the configuration."""


class DegenerateDataError(DataError):
    """No usable observations remain (e.g. truncation removed everything)."""


class RankDeficiencyError(DataError):
    """A Gram/design matrix is singular and no ridge was allowed."""


class InitializationError(DataError):
    """No grid point produced a usable starting value."""


class DiagnosticError(WavesieveError):
    """An inference diagnostic could not be formed (e.g. indefinite curvature)."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
