"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3 and numeric failures exit 4.
"""


class GcalError(Exception):
    """Base class for every error raised by gcal."""


class InvalidArgument(GcalError, ValueError):
    pass


class InvalidState(GcalError, RuntimeError):
    pass


class UndefinedValue(GcalError, ArithmeticError):
    """A statistic is undefined for the given input (e.g. homophily of an isolated node)."""


class NumericFailure(GcalError, FloatingPointError):
    def __init__(self, message, parameter=None, round_index=None):
        super().__init__(message)
        self.parameter = parameter
        self.round_index = round_index


class ConfigError(GcalError, ValueError):
    pass


class DataError(GcalError):
    """Base class for dataset bundle problems."""


class MissingFileError(DataError, FileNotFoundError):
    pass


class CountMismatchError(DataError):
    pass


class LabelRangeError(DataError):
    pass


class NonFiniteFeatureError(DataError):
    pass


class MalformedRowError(DataError):
    pass
