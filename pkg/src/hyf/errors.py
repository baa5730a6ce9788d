"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a structural requirement."""


class NonMonotoneTimes(ValidationError):
    """Observation times are not strictly increasing."""


class LengthMismatch(ValidationError):
    """times and values differ in length."""


class TooFewPoints(ValidationError):
    """A series needs at least two observations to form an interval."""


class CrossSeriesTie(ValidationError):
    """The same timestamp appears in both series."""


class IndexOutOfRange(IndexError):
    """Point or interval index outside the valid range."""


class EmptyPattern(ValueError):
    """Pattern counting requires a non-empty pattern."""


class ZeroOverlaps(ValueError):
    """The loss ratio is undefined when no intervals overlap."""


class NonPositiveRate(ValueError):
    """Poisson rates must be strictly positive."""


class RejectionBudgetExceeded(RuntimeError):
    """Too many resamples without meeting the acceptance conditions."""
