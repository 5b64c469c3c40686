"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Alphabet sizes of two objects that must be composed do not agree."""


class CardinalityError(ValueError):
    """An auxiliary alphabet exceeds the support bound of its mode."""


class MarkovViolation(ValueError):
    """A joint law does not satisfy a required Markov chain."""


class InfeasibleDistortion(ValueError):
    """Target distortion lies below the smallest achievable value."""

    def __init__(self, message, gap=None, limit=None):
        super().__init__(message)
        self.gap = gap
        self.limit = limit


class EnumerationCapExceeded(RuntimeError):
    """Exact enumeration would exceed the configured cost cap."""

    def __init__(self, message, cost, cap):
        super().__init__(message)
        self.cost = cost
        self.cap = cap
