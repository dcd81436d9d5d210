"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs or configuration
(CLI exit code 2) and :class:`NumericalError` for failures that arise while
computing on otherwise well-formed data (CLI exit code 3).
"""


class RiskError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(RiskError, ValueError):
    pass


class NumericalError(RiskError, ArithmeticError):
    pass


# input / shape problems
class EmptyWindow(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class ShapeError(ValidationError):
    pass


class InvalidInput(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class InvalidPrior(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ArbitrageError(ValidationError):
    pass


class InfeasibleTarget(ValidationError):
    pass


class IoError(RiskError, OSError):
    pass


# numerical failures
class DegenerateInput(NumericalError):
    pass


class SingularDesign(NumericalError):
    pass


class SingularCovariance(NumericalError):
    pass


class DegenerateResampling(NumericalError):
    pass


class ImproperPosterior(NumericalError):
    pass


class DegeneratePortfolio(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass
