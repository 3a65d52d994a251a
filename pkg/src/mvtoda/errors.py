"""Exception types raised across the package."""


class MvtodaError(Exception):
    """Base class for all library errors."""


class DimensionError(MvtodaError, ValueError):
    pass


class ParameterError(MvtodaError, ValueError):
    pass


class DomainError(MvtodaError, ValueError):
    pass


class SingularMatrixError(MvtodaError, ArithmeticError):
    """Raised by :func:`mvtoda.linalg.solve` when a pivot is numerically zero."""

    def __init__(self, pivot, magnitude=None):
        self.pivot = pivot
        self.magnitude = magnitude
        msg = f"matrix is numerically singular at pivot {pivot}"
        if magnitude is not None:
            msg += f" (|pivot| = {magnitude:.3e})"
        super().__init__(msg)


class IllConditionedError(MvtodaError, ArithmeticError):
    """Block Gram system for degree ``n`` cannot be solved reliably."""

    def __init__(self, n, detail=""):
        self.n = n
        super().__init__(f"block Gram system ill-conditioned at degree n={n}" + (f": {detail}" if detail else ""))


class QuadratureAccuracyError(MvtodaError, ArithmeticError):
    pass


class ConsistencyError(MvtodaError, ArithmeticError):
    """An identity that must hold numerically was violated beyond tolerance."""


class ContractError(MvtodaError, ValueError):
    pass


class WindowError(MvtodaError, ValueError):
    """The valid lattice window is too small for the requested operation."""

    def __init__(self, msg, max_steps=None, max_horizon=None):
        self.max_steps = max_steps
        self.max_horizon = max_horizon
        super().__init__(msg)


class ConfigError(ParameterError):
    """Malformed run configuration; ``field`` names the offending entry."""

    def __init__(self, field, msg):
        self.field = field
        super().__init__(f"config field {field!r}: {msg}")
