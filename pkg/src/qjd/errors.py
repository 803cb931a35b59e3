"""Exception types shared across the package."""


class QjdError(Exception):
    """Base class for all package errors."""


class ValidationError(QjdError):
    """Input violates a documented precondition."""


class ShapeError(QjdError):
    """Dimension or qubit-count mismatch."""


class CapacityError(QjdError):
    """Problem size exceeds a dense-algebra memory guard."""


class ParseError(QjdError):
    """Malformed input file; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(QjdError):
    """Numerical invariant broken (non-finite input, lost Hermiticity)."""


class DegenerateOperatorError(QjdError):
    """Operator is identically zero after dropping negligible terms."""


class DegenerateOutcomeError(QjdError):
    """Postselection cannot succeed; carries the (zero) success probability."""

    def __init__(self, message, success_probability=0.0):
        super().__init__(message)
        self.success_probability = success_probability


class IllConditionedEpsilonError(QjdError):
    """Correction-scale denominator too small to divide by."""
