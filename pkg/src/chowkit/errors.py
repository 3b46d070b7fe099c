"""Shared exception types."""


class ChowkitError(ValueError):
    """Base class for all library errors."""


class DimensionMismatchError(ChowkitError):
    pass


class ContextMismatchError(ChowkitError):
    pass


class DegeneratePolarizationError(ChowkitError):
    """Antisymmetric form with vanishing top self-pairing (chi = 0)."""


class RosatiError(ChowkitError):
    """Endomorphism matrix fails the Rosati symmetry M^T E = E M."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotNilpotentError(ChowkitError):
    pass


class NotQuadraticError(ChowkitError):
    """Matrix has no monic quadratic annihilating polynomial."""


class TruncationMismatchError(ChowkitError):
    pass


class ParseError(ChowkitError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class EvalError(ChowkitError):
    """Expression evaluation failure, carrying the offending subexpression."""

    def __init__(self, message, where=None):
        if where:
            message = f"in '{where}': {message}"
        super().__init__(message)
        self.where = where


class ConfigError(ChowkitError):
    pass
