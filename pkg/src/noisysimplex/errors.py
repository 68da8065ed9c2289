"""Exception types raised across the package."""


class SimplexError(Exception):
    """Base class for all package errors."""


class DegenerateSimplex(SimplexError):
    pass


class DimMismatch(SimplexError):
    pass


class UnsupportedNoiseless(SimplexError):
    """Raised when a density is requested for a model with sigma == 0."""


class NoiseBoundUndefined(SimplexError):
    """The noise-variance bound has a nonpositive denominator.

    The localization ball is still available on ``self.ball`` with its
    ``noise_bound`` set to NaN.
    """

    def __init__(self, message, ball=None):
        super().__init__(message)
        self.ball = ball


class InvalidConfidence(SimplexError, ValueError):
    pass


class InvalidConfig(SimplexError, ValueError):
    pass


class InsufficientCover(SimplexError):
    pass


class EmptyFamily(SimplexError):
    pass


class UnsupportedDimension(SimplexError):
    pass


class PackingBudgetExceeded(SimplexError):
    def __init__(self, message, achieved=0):
        super().__init__(message)
        self.achieved = achieved
