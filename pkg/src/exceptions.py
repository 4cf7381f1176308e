"""Exception hierarchy shared by every TEMSP module.

Each class carries the process exit code the command line returns for it.
"""

from typing import Iterable, List, Optional


class TemspError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class UsageError(TemspError, ValueError):
    """A call violated an operation's preconditions."""

    exit_code = 2


class ConfigurationError(TemspError, ValueError):
    """A model, rule, grid or run configuration is invalid.

    Attributes:
        problems: Every violated field, in the order it was found
    """

    exit_code = 2

    def __init__(self, message: str, problems: Optional[Iterable[str]] = None):
        """Initialize with a summary and the list of violated fields.

        Args:
            message: Summary line
            problems: Individual violations (defaults to the summary alone)
        """
        self.problems: List[str] = list(problems) if problems is not None else [message]
        if len(self.problems) > 1:
            message = message + "\n  - " + "\n  - ".join(self.problems)
        super().__init__(message)


class AdmissibilityError(TemspError):
    """The requested step size fails the step-size gate."""

    exit_code = 3


class SimulationError(TemspError, ArithmeticError):
    """A non-finite state appeared during the recursion.

    Attributes:
        step: Index k of the first offending step
    """

    exit_code = 4

    def __init__(self, message: str, step: int):
        """Initialize with the offending step index.

        Args:
            message: Description of the failure
            step: Step index k at which the state became non-finite
        """
        self.step = step
        super().__init__(f"{message} (step {step})")


class ConvergenceError(TemspError, ArithmeticError):
    """An iterative solver hit its iteration cap.

    Attributes:
        iterations: Number of iterations performed
    """

    exit_code = 4

    def __init__(self, message: str, iterations: int):
        """Initialize with the iteration count.

        Args:
            message: Description of the failure
            iterations: Iterations performed before giving up
        """
        self.iterations = iterations
        super().__init__(f"{message} after {iterations} iterations")


class CsvFormatError(TemspError, ValueError):
    """A CSV input does not match its schema.

    Attributes:
        path: File that failed to parse
        line: 1-based line number of the problem
    """

    exit_code = 2

    def __init__(self, path: str, line: int, message: str):
        """Initialize with location information.

        Args:
            path: File that failed to parse
            line: 1-based line number of the problem
            message: What is wrong
        """
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
