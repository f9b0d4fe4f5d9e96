"""Exception hierarchy for the almost-ellipticity toolkit.

Errors are grouped by the CLI exit code they map to: input problems (1), validation and
numerical failures (2), and internal consistency failures (3).
"""

from typing import Any, Dict, Optional


class AlmostEllipticError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "message": self.message, "details": self.details}


# Input errors (exit 1)


class InputError(AlmostEllipticError):
    """Unreadable input or input that does not match the schema."""

    exit_code = 1


class SchemaError(InputError):
    """Input document does not match the expected schema."""

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{field}: {message}", {"field": field, "line": line})
        self.field = field
        self.line = line


# Validation errors (exit 2)


class ValidationError(AlmostEllipticError):
    """Input parsed but violates a mathematical invariant or precondition."""


class MalformedTensor(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonIntegralGenerator(ValidationError):
    """A torus generator has an eigenvalue away from i*Z, so it does not define a torus action."""


class InvalidPresentation(ValidationError):
    pass


class DisconnectedCompactPart(ValidationError):
    """The decision procedures need a connected compact part."""


class PreconditionError(ValidationError):
    pass


class NotSemisimple(ValidationError):
    pass


class NotAnIdeal(ValidationError):
    pass


# Numerical errors (exit 2)


class NumericalError(AlmostEllipticError):
    """A numerical decision fell into a borderline band or an iteration failed."""


class NumericalRankAmbiguity(NumericalError):
    pass


class WeightRoundingAmbiguity(NumericalError):
    pass


class RecoordinatizationFailure(NumericalError):
    pass


class NotInvertible(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SpectralAmbiguity(NumericalError):
    pass


class Undetermined(NumericalError):
    pass


class NoWitness(NumericalError):
    pass


# Consistency errors (exit 3)


class ConsistencyError(AlmostEllipticError):
    """Two independent computations of the same quantity disagree."""

    exit_code = 3


class InternalDisagreement(ConsistencyError):
    pass


class EquivalenceViolation(ConsistencyError):
    pass


class GalleryFailure(ConsistencyError):
    pass


class UndeclaredCompactDirections(UserWarning):
    """A layer direction acts like a compact direction the presentation did not declare."""
