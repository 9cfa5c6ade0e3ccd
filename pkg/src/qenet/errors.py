"""Exception hierarchy shared by all qenet modules.

The CLI maps these onto exit codes: data errors exit with 2, numeric
failures with 3.
"""


class QenetError(Exception):
    """Base class for all package errors."""


class DataError(QenetError, ValueError):
    """Bad input data (exit code 2)."""


class InvalidArgument(DataError):
    pass


class InvalidTour(DataError):
    pass


class InstanceTooLarge(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionViolation(DataError):
    pass


class NumericFailure(QenetError, ArithmeticError):
    """A computation produced non-finite or singular results (exit code 3)."""


class DivergentRate(NumericFailure):
    pass


class StuckState(NumericFailure):
    pass


class UnreachableMinimum(NumericFailure):
    pass
