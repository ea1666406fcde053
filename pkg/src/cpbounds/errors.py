"""Exception types shared across the package."""


class TransienceError(ValueError):
    """Raised when an operation requiring a transient walk is asked for d <= 2."""


class AccuracyError(RuntimeError):
    """Raised when a numerical routine cannot meet its requested tolerance."""


class ConditionError(ValueError):
    """Raised when the positivity condition on the weight form L(a, b), or the
    infection-rate threshold 1/(2d L(a, b)) derived from it, is violated."""


class NumericRangeError(ArithmeticError):
    """Raised on floating-point overflow or detected numerical instability."""
