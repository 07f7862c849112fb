"""Exception hierarchy shared by all modules.

Every error raised on purpose by the library derives from :class:`QfaLabError`.
The CLI maps :class:`NumericalError` subclasses to exit code 3 and the rest to
exit code 2.
"""


class QfaLabError(Exception):
    """Base class for library errors."""


class InvalidParameter(QfaLabError, ValueError):
    """A scalar argument is outside its allowed range (modulus, k, ell, ...)."""


class InvalidSpec(QfaLabError, ValueError):
    """An automaton description violates its invariants."""


class BudgetExceeded(QfaLabError):
    """An exhaustive enumeration would exceed the candidate budget."""


class ResolutionError(QfaLabError, ValueError):
    """The sampling grid is too coarse for the requested mode."""


class DomainError(QfaLabError, ValueError):
    """Argument outside a function's mathematical domain."""


class GridError(QfaLabError, ValueError):
    """Fields sampled on incompatible grids."""


class AmplitudeExceedsInput(QfaLabError, ValueError):
    """Target amplitude is not enveloped by the illuminating Gaussian."""

    def __init__(self, worst_ratio, location):
        self.worst_ratio = float(worst_ratio)
        self.location = tuple(float(v) for v in location)
        super().__init__(
            f"target amplitude exceeds input Gaussian: worst ratio "
            f"{self.worst_ratio:.6g} at (x, y) = ({self.location[0]:.4g}, "
            f"{self.location[1]:.4g}) m"
        )


class ConfigError(QfaLabError, ValueError):
    """Malformed or inconsistent configuration."""


class RangeError(QfaLabError, IndexError):
    """Requested loop peak lies outside the histogram span."""


class NumericalError(QfaLabError):
    """Base for failures of a numerical procedure on valid input."""


class NormalizationError(NumericalError):
    """Zeroth-loop counts are not positive, so loops cannot be normalized."""


class InversionError(NumericalError):
    """A tomography axis has no counts."""


class FitError(NumericalError):
    """A calibration fit is degenerate or under-sampled."""
