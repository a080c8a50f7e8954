"""Exception hierarchy shared by every module.

Two branches matter for the CLI exit-code contract: ValidationError (bad
inputs or violated preconditions, exit code 2) and NumericalError (a
computation that started but could not finish to tolerance, exit code 3).
"""


class SpacingLabError(Exception):
    """Base class for all package errors."""


class ValidationError(SpacingLabError):
    """Inputs outside an operation's documented domain."""


class NumericalError(SpacingLabError):
    """A numerical procedure failed to meet its contract."""


class DomainError(ValidationError):
    """Scalar argument outside the allowed range."""


class UnsupportedKindError(ValidationError):
    """Operation not defined for this density kind."""


class TailMassError(ValidationError):
    """Truncation window leaves more probability mass outside than allowed."""


class SupportError(ValidationError):
    """Reference density vanishes where the numerator carries mass."""


class InfeasibleError(ValidationError):
    """Moment constraints admit no density of the requested form."""


class OrderingError(ValidationError):
    """Coordinates required to be strictly increasing are not."""


class ConstraintRepairError(ValidationError):
    """A perturbed trial density could not be rescaled onto the constraint."""


class RangeOverflowError(NumericalError):
    """Result exceeds the representable floating-point range."""


class NonConvergenceError(NumericalError):
    """Iteration exhausted its budget before reaching tolerance."""


class NoRootError(NumericalError):
    """Scalar equation has no root inside any reachable bracket."""


class StabilityError(NumericalError):
    """Requested time step violates the scheme's stability bound."""


class StepFloorError(NumericalError):
    """Adaptive step halving hit the minimum step size."""


class MonotonicityError(NumericalError):
    """A quantity required to be monotone in time failed the check."""


class AliasingError(NumericalError):
    """Spectral mass reached the edge of the frequency window."""


class BoundaryLeakError(NumericalError):
    """Probability mass at the domain boundary exceeds tolerance."""
