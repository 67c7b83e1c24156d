"""
Exception hierarchy for tnsim.

Every error raised deliberately by the engine derives from
TensorNetworkError. Errors about malformed values also derive from
ValueError so generic callers can catch them without importing this module.
Non-convergence is never an exception: results carry a converged flag.
"""

from typing import Any, Dict, List, Optional


class TensorNetworkError(Exception):
    """Base class for engine errors."""
    pass


class DimensionError(TensorNetworkError, ValueError):
    """Raised when index extents or shapes do not match."""
    pass


class NumericInputError(TensorNetworkError, ValueError):
    """Raised when an input contains NaN or infinite entries."""
    pass


class ConditioningError(TensorNetworkError):
    """Raised when a metric matrix is indefinite or too ill-conditioned."""

    def __init__(self, message: str, smallest_eigenvalue: Optional[float] = None, **diagnostics: Any):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue
        self.diagnostics: Dict[str, Any] = diagnostics


class SingularSystemError(TensorNetworkError):
    """Raised when a linear system stays singular after regularization."""
    pass


class UnsupportedGaugeError(TensorNetworkError):
    """Raised when a gauge/normal form is requested for a periodic state."""
    pass


class DegenerateStateError(TensorNetworkError):
    """Raised when a state has zero norm."""
    pass


class DomainError(TensorNetworkError, ValueError):
    """Raised when a parameter lies outside its mathematical domain."""
    pass


class UnsupportedRangeError(TensorNetworkError, ValueError):
    """Raised when a Hamiltonian term reaches beyond nearest neighbours."""
    pass


class UnsupportedModelError(TensorNetworkError, ValueError):
    """Raised when an algorithm cannot handle the given model."""
    pass


class CapacityError(TensorNetworkError):
    """Raised when a dense realization would exceed the configured size cap."""
    pass


class InvalidSchemeError(TensorNetworkError, ValueError):
    """Raised when a Trotter scheme is inconsistent with the model or mode."""
    pass


class UnsupportedDistributionError(TensorNetworkError, ValueError):
    """Raised when a disorder distribution is neither product nor tabulated."""
    pass


class NumericalConsistencyError(TensorNetworkError):
    """Raised when a computed quantity violates a mathematical identity."""
    pass


class ConfigError(TensorNetworkError):
    """Raised when an experiment configuration cannot be parsed or validated."""

    def __init__(self, message: str, context: Optional[str] = None):
        super().__init__(f"{context}: {message}" if context else message)
        self.context = context


class UnknownExperimentError(ConfigError):
    """Raised when a configuration names an experiment that is not registered."""

    def __init__(self, name: str, valid: List[str]):
        super().__init__(f"unknown experiment '{name}'; valid names: {', '.join(sorted(valid))}")
        self.name = name
        self.valid = sorted(valid)


class ResultsWriteError(TensorNetworkError):
    """Raised when result records cannot be written."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"cannot write results to {path}: {reason}")
        self.path = path
