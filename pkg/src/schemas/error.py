import sys

from pydantic import ValidationError

from src.utils import print_error


class BecError(Exception):
    """Base class for exceptions raised by the solver."""

    pass


class ConfigError(BecError):
    """Raised when the run configuration is not valid."""

    pass


class DomainError(BecError, ValueError):
    """Raised when an argument is outside the domain of a function."""

    pass


class DivergenceError(DomainError):
    """Raised when a series or integral diverges at the requested argument."""

    pass


class BranchNotAdmissibleError(BecError):
    """Raised when a branch is requested outside its chemical potential window."""

    pass


class NumericalError(BecError):
    """Raised when a bracket cannot be grown or a root cannot be located."""

    pass


class InvalidRegionError(BecError):
    """Raised when the finite-volume gap becomes non-positive."""

    pass


class FvIterationError(BecError):
    """Raised when the finite-volume fixed-point iteration does not converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

# Define the mapping between custom errors and process exit codes
ERROR_MAPPING = {
    ConfigError: EXIT_CONFIG,
    ValidationError: EXIT_CONFIG,
    DomainError: EXIT_SOLVER,
    DivergenceError: EXIT_SOLVER,
    BranchNotAdmissibleError: EXIT_SOLVER,
    NumericalError: EXIT_SOLVER,
    InvalidRegionError: EXIT_SOLVER,
    FvIterationError: EXIT_SOLVER,
}


def exit_status_for(exc_type: type) -> int:
    """Exit status for an exception type, resolved along its MRO."""
    for klass in exc_type.__mro__:
        if klass in ERROR_MAPPING:
            return ERROR_MAPPING[klass]
    return EXIT_SOLVER


class SolverErrorHandler:
    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is None or not issubclass(exc_type, Exception):
            return False
        status = exit_status_for(exc_type)
        print_error(f"{exc_type.__name__}: {exc_val}", file=sys.stderr)
        raise SystemExit(status) from exc_val
