"""Exception types shared across the library."""


class HungryBatError(Exception):
    """Base class for all library-specific errors."""


class DomainError(HungryBatError, ValueError):
    """An argument lies outside its mathematical domain."""


class LengthMismatchError(HungryBatError, ValueError):
    """Vector arguments disagree on the number of cacti."""


class InstanceValidationError(HungryBatError, ValueError):
    """Instance parameters violate the model's admissible ranges.

    ``index`` is the 1-based position of the offending cactus, or None when
    the problem is not attributable to a single cactus.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class EmptyInstanceError(InstanceValidationError):
    """An instance must contain at least one cactus."""


class InvalidRateError(InstanceValidationError):
    """A nectar rate is not a strictly positive finite real."""


class InvalidStealProbError(InstanceValidationError):
    """A stealing probability is not a finite real in the open interval (0, 1)."""


class ConsistencyError(HungryBatError, RuntimeError):
    """An internal numerical invariant was violated; indicates a bug, not bad input."""
