"""Exception hierarchy shared by all modules."""


class StructOpsError(Exception):
    """Base class for every error raised by this package."""


class InvalidSpecError(StructOpsError, ValueError):
    """Malformed input: bad dimensions, missing parameters, unknown keys."""


class DomainError(StructOpsError, ValueError):
    """Evaluation point outside the interval the function is defined on."""


class AccuracyError(StructOpsError, ArithmeticError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class PreconditionError(StructOpsError):
    """A hypothesis required by the computation is not satisfied by the input."""


class SingularityError(StructOpsError, ArithmeticError):
    """Operator is numerically singular."""

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class NotPositiveError(StructOpsError, ArithmeticError):
    """Triangular factorization broke down on a non-positive pivot."""
