"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input, config, or file fails validation before any computation runs."""


class IndicatorUndefined(ArithmeticError):
    """Raised when an indicator has no value at a timestep (degenerate percentiles).

    Series evaluation catches this and records a gap; it never fabricates a number.
    """
