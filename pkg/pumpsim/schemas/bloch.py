from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class BlochHamiltonian(BaseModel):
    """2x2 momentum-space Hamiltonian of the clean chain."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: float
    phi: float
    matrix: np.ndarray


class BandSolution(BaseModel):
    """Eigenpairs of a Bloch Hamiltonian, lower band first."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    energies: Tuple[float, float]
    states: np.ndarray = Field(..., description="Columns are the lower and upper band eigenvectors")


class ChernResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    nu1: int
    nu2: int
    grid: Tuple[int, int]
    raw: Tuple[float, float] = Field(..., description="Link-variable sums before rounding")
    curvature_integral: Tuple[float, float] = Field(
        ..., description="Midpoint-rule integral of the analytic Berry curvature"
    )


class WannierState(BaseModel):
    """Single-particle Wannier state on the 2L-site chain."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    band: int = Field(..., ge=1, le=2)
    cell: int = Field(..., ge=1)
    phi: float
    amplitudes: np.ndarray

    @property
    def n_sites(self) -> int:
        return int(self.amplitudes.shape[0])


class BandStructure(BaseModel):
    """Band energies over the (k, phi) torus; rows follow phi, columns follow k."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: np.ndarray
    phi: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    gap: np.ndarray
