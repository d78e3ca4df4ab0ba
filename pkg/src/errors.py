"""
Error Types

Exceptions raised by the library. The command-line driver maps each of them
to a stable exit code (see docs/exit_codes.md).
"""


class HodgeCorError(Exception):
    """Base class for all library errors."""

    exit_code = 10


class ParseError(HodgeCorError):
    """Malformed input file; carries the 1-based location when known."""

    exit_code = 3

    def __init__(self, message: str, line: int = None, column: int = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(HodgeCorError):
    """An input violates an axiom; ``report`` lists every violation."""

    exit_code = 4

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class RegimeError(ValidationError):
    """Operation requested in a scalar regime it does not support."""


class DegreeMismatchError(ValidationError):
    """Graded degrees of the inputs are incompatible."""


class SingularityError(HodgeCorError):
    """A kernel was evaluated on its singular locus."""

    exit_code = 4


class ConvergenceError(HodgeCorError):
    """Numerical integration did not reach its tolerance; ``trace`` holds the refinement history."""

    exit_code = 5

    def __init__(self, message: str, trace=None):
        self.trace = trace or []
        super().__init__(message)
