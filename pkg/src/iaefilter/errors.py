"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries one.
"""


class IaeError(Exception):
    exit_code = 1


class ShapeError(IaeError, ValueError):
    exit_code = 2


class ConfigError(IaeError, ValueError):
    exit_code = 1


class ParseError(IaeError, ValueError):
    exit_code = 2


class EvaluationError(IaeError, ValueError):
    exit_code = 2


class NumericError(IaeError, ArithmeticError):
    """Raised when a loss or parameter goes non-finite during training."""

    exit_code = 3


class ModelFileError(IaeError, ValueError):
    exit_code = 2
