"""Exception types shared across the package."""


class NnqsError(Exception):
    """Base class for all package errors."""


class ShapeError(NnqsError, ValueError):
    """Array dimensions inconsistent with the state or operation."""


class StructureError(NnqsError, ValueError):
    """Matrix violates a required structure (symmetry, star pattern, ...)."""


class ResourceLimitError(NnqsError, RuntimeError):
    """Requested computation exceeds a configured brute-force cap."""


class SingularRatioError(NnqsError, ArithmeticError):
    """Amplitude ratio against an exactly vanishing amplitude."""


class DegenerateGateError(NnqsError, ValueError):
    """Gate parameters outside the representable family (e.g. an exactly
    diagonal gate, whose coupling weight would be infinite)."""


class FitConvergenceError(NnqsError, RuntimeError):
    """Iterative factor fit failed to reach the residual tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class SignProblemError(NnqsError, ValueError):
    """Joint sampling refused: complex couplings make the summand
    non-positive and importance sampling unreliable."""


class UndefinedFidelityError(NnqsError, ValueError):
    """Fidelity requested against a zero state vector."""


class ConfigError(NnqsError, ValueError):
    """Invalid or inconsistent run configuration."""
