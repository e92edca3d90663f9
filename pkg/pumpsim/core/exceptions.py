"""Custom exception classes for the simulation library."""
from typing import Optional

from pumpsim.core.constants import (
    ERROR_CODE_BASIS_MISMATCH,
    ERROR_CODE_CONFIG_ERROR,
    ERROR_CODE_DIMENSION_MISMATCH,
    ERROR_CODE_GRID_TOO_COARSE,
    ERROR_CODE_INTEGRATION_FAILURE,
    ERROR_CODE_NON_UNITARY,
    ERROR_CODE_NUMERICAL_ERROR,
    ERROR_CODE_OUTPUT_ERROR,
    ERROR_CODE_SAMPLE_FAILURE,
    ERROR_CODE_VALIDATION_ERROR,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
)


class BaseSimulationError(Exception):
    """Base exception class for simulation errors."""

    def __init__(
        self,
        detail: str,
        exit_code: int = EXIT_NUMERICAL_ERROR,
        code: Optional[str] = None,
    ):
        self.detail = detail
        self.exit_code = exit_code
        self.code = code
        super().__init__(detail)


class ValidationError(BaseSimulationError):
    """Raised when an argument value is outside its allowed range."""

    def __init__(self, detail: str = "Validation error"):
        super().__init__(
            detail=detail,
            exit_code=EXIT_CONFIG_ERROR,
            code=ERROR_CODE_VALIDATION_ERROR,
        )


class ConfigError(BaseSimulationError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(self, detail: str = "Invalid configuration", source: Optional[str] = None):
        if source:
            detail = f"{source}: {detail}"
        super().__init__(
            detail=detail,
            exit_code=EXIT_CONFIG_ERROR,
            code=ERROR_CODE_CONFIG_ERROR,
        )


class DimensionMismatchError(BaseSimulationError):
    """Raised when array sizes disagree with the chain length."""

    def __init__(self, expected: int, actual: int, what: str = "vector"):
        super().__init__(
            detail=f"{what} has length {actual}, expected {expected}",
            exit_code=EXIT_CONFIG_ERROR,
            code=ERROR_CODE_DIMENSION_MISMATCH,
        )


class BasisMismatchError(BaseSimulationError):
    """Raised when two-boson states live on different chains."""

    def __init__(self, left: int, right: int):
        super().__init__(
            detail=f"states are defined on {left} and {right} sites",
            exit_code=EXIT_CONFIG_ERROR,
            code=ERROR_CODE_BASIS_MISMATCH,
        )


class NumericalError(BaseSimulationError):
    """Raised when a numerical routine fails its own accuracy checks."""

    def __init__(self, detail: str, code: str = ERROR_CODE_NUMERICAL_ERROR):
        super().__init__(detail=detail, exit_code=EXIT_NUMERICAL_ERROR, code=code)


class IntegrationError(NumericalError):
    """Raised when propagation drifts off the unit sphere."""

    def __init__(self, detail: str, t: Optional[float] = None, drift: Optional[float] = None):
        self.t = t
        self.drift = drift
        if t is not None and drift is not None:
            detail = f"{detail} (t={t:.6g}, drift={drift:.3e})"
        super().__init__(detail=detail, code=ERROR_CODE_INTEGRATION_FAILURE)


class GridTooCoarseError(NumericalError):
    """Raised when a Chern integral does not round cleanly to an integer."""

    def __init__(self, raw: float, n_k: int, n_t: int):
        super().__init__(
            detail=f"Chern integral {raw:.6f} is not within tolerance of an integer on a {n_k}x{n_t} grid",
            code=ERROR_CODE_GRID_TOO_COARSE,
        )


class NonUnitaryError(NumericalError):
    """Raised when a propagator handed to the permanent oracle is not unitary."""

    def __init__(self, deviation: float):
        super().__init__(
            detail=f"propagator deviates from unitarity by {deviation:.3e}",
            code=ERROR_CODE_NON_UNITARY,
        )


class SampleError(NumericalError):
    """Raised when one disorder sample of an ensemble fails."""

    def __init__(self, detail: str, sample_index: int, seed: int):
        self.sample_index = sample_index
        self.seed = seed
        super().__init__(
            detail=f"sample {sample_index} (seed {seed}) failed: {detail}",
            code=ERROR_CODE_SAMPLE_FAILURE,
        )


class OutputError(BaseSimulationError):
    """Raised when result files cannot be written."""

    def __init__(self, detail: str, path: Optional[str] = None):
        if path:
            detail = f"{path}: {detail}"
        super().__init__(
            detail=detail,
            exit_code=EXIT_NUMERICAL_ERROR,
            code=ERROR_CODE_OUTPUT_ERROR,
        )
