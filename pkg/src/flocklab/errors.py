"""Exception types shared across the toolkit."""


class FlocklabError(Exception):
    """Base class for all toolkit errors."""


class NonSymmetricError(FlocklabError):
    """Matrix or graph violates a required symmetry tolerance."""


class DimensionMismatchError(FlocklabError):
    """Operands have incompatible shapes."""


class PreconditionViolatedError(FlocklabError):
    """Caller violated a documented precondition."""


class InvalidSizeError(FlocklabError):
    """Graph constructor received an inadmissible size or parity."""


class DivisionDegenerateError(FlocklabError):
    """Ratio formula hit a non-positive denominator."""


class DegenerateVelocityError(FlocklabError):
    """A velocity norm fell below tolerance; the alignment model is undefined there."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NonFiniteError(FlocklabError):
    """State overflowed to inf/nan during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class EdgeAsymmetryError(FlocklabError):
    """Operation requires a symmetric edge set."""


class UnknownKindError(FlocklabError):
    """Unrecognized envelope or certificate kind."""


class Requires2DError(FlocklabError):
    """Operation needs two-dimensional velocity vectors."""


class ConfigInvalidError(FlocklabError):
    """Scenario configuration failed validation."""


class IoFailureError(FlocklabError):
    """Filesystem operation failed during a scenario run."""
