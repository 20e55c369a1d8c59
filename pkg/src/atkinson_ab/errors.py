"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented contract."""


class EmptyInputError(ValidationError):
    """A metric vector was empty where at least one value is required."""


class NegativeValueError(ValidationError):
    """A metric value was negative (metrics must be >= 0)."""


class ZeroTotalError(ValidationError):
    """All values are zero, so the mean is zero and the index is undefined."""


class EpsilonMismatchError(ValidationError):
    """Two buffers or estimates built at different aversion parameters were combined."""


class DegenerateVarianceError(ValidationError):
    """A nonzero difference was observed with zero estimated variance."""


class NoRootError(ValidationError):
    """The elicitation residual has no sign change on the search bracket."""


class DataFormatError(ValidationError):
    """An input file is unreadable or structurally malformed."""
