from typing import Any, Optional


# Class: ServiceError
class ServiceError(Exception):
    """Exception raised by services and physics code with structured error information.

    Attributes:
        code: a short machine-friendly error code (e.g., 'KSPACE_GRID_COVERAGE')
        message: human-readable message
        details: optional additional data (failing scan point, k index, ...)
        exit_code: process exit status used by the command-line front end
    """

    exit_code = 1

    # Function: __init__
    def __init__(self, code: str, message: str, details: Optional[Any] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details

    # Function: __reduce__
    def __reduce__(self):
        # keeps subclasses picklable across worker processes
        return (self.__class__, (self.code, self.message, self.details))

    # Function: to_dict
    def to_dict(self):
        return {
            "code": self.code,
            "message": self.message,
            "details": self.details,
            "exit_code": self.exit_code,
        }


# Class: ValidationFailure
class ValidationFailure(ServiceError):
    exit_code = 1


# Class: ConfigError
class ConfigError(ServiceError):
    """Invalid or missing configuration values."""

    exit_code = 2


# Class: ConvergenceError
class ConvergenceError(ServiceError):
    """Solver did not reach the requested tolerance."""

    exit_code = 3


# Class: SearchError
class SearchError(ServiceError):
    """Gate-parameter search found no acceptable point."""

    exit_code = 4


# Class: GridCoverageError
class GridCoverageError(ConvergenceError):
    pass


# Class: NonAdiabaticReturnError
class NonAdiabaticReturnError(ConvergenceError):
    pass


# Class: BranchTrackingError
class BranchTrackingError(ConvergenceError):
    pass


# Class: DimensionError
class DimensionError(ConfigError):
    pass


# Class: LinearizationError
class LinearizationError(ConfigError):
    pass
