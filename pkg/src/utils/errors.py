"""Exception types raised by the simulation toolkit.

Every error carries a stable ``code`` that the experiment runner prints as its
diagnostic before exiting with status 2.
"""
from typing import Optional, Sequence


class MfsimError(Exception):
    """Base class for all toolkit errors."""
    code = "mfsim.error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class EvaluationError(MfsimError, ValueError):
    """A test function returned a non-finite value at a support point."""
    code = "measures.evaluation"

    def __init__(self, message: str, point: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.point = point


class UnsupportedDimensionError(MfsimError, ValueError):
    code = "measures.unsupported_dimension"


class MassMismatchError(MfsimError, ValueError):
    code = "measures.mass_mismatch"


class ParabolicityViolationError(MfsimError, ValueError):
    """2a - sigma sigma^T has an eigenvalue below the tolerated floor."""
    code = "coeffs.parabolicity"

    def __init__(self, t: float, x: Sequence[float], eigenvalue: float):
        super().__init__(
            f"2a - sigma sigma^T is not PSD at t={t:.6g}, x={list(x)}: "
            f"eigenvalue {eigenvalue:.6g}"
        )
        self.t = t
        self.x = list(x)
        self.eigenvalue = eigenvalue


class IncompleteDerivativeError(MfsimError, ValueError):
    code = "coeffs.incomplete_derivative"


class IncompatibleTrajectoryError(MfsimError, ValueError):
    code = "mckv.incompatible_trajectory"


class InsufficientSamplesError(MfsimError, ValueError):
    code = "duality.insufficient_samples"


class ConditioningMismatchError(MfsimError, ValueError):
    code = "duality.conditioning_mismatch"


class AssumptionViolationError(MfsimError, ValueError):
    code = "chaos.assumption_violation"


class ReferenceQualityError(MfsimError, ValueError):
    code = "chaos.reference_quality"


class UnsupportedFamilyError(MfsimError, ValueError):
    code = "coeffs.unsupported_family"


class UnknownModelError(MfsimError, ValueError):
    code = "config.unknown_model"


class InvalidGridError(MfsimError, ValueError):
    code = "config.invalid_grid"


class ConfigError(MfsimError, ValueError):
    code = "config.invalid"


class OutputError(MfsimError, OSError):
    code = "io.failure"
