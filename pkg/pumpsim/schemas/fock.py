from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from pumpsim.core.constants import STATE_NORM_GUARD


class SymBasis:
    """Symmetric two-boson basis |j, j'> with j <= j', ordered lexicographically.

    Sites are 1-based in the public methods; ``rows``/``cols`` hold the
    0-based pair members for vectorized use.
    """

    def __init__(self, n_sites: int):
        if n_sites < 1:
            raise ValueError("a basis needs at least one site")
        self.n_sites = n_sites
        rows, cols = np.triu_indices(n_sites)
        rows.setflags(write=False)
        cols.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self.size = int(rows.shape[0])
        index = np.empty((n_sites, n_sites), dtype=np.int64)
        index[rows, cols] = np.arange(self.size)
        index[cols, rows] = np.arange(self.size)
        index.setflags(write=False)
        self._index = index
        self.diagonal = rows == cols

    def index(self, j: int, j2: int) -> int:
        if not (1 <= j <= self.n_sites and 1 <= j2 <= self.n_sites):
            raise ValueError(f"sites ({j}, {j2}) outside 1..{self.n_sites}")
        return int(self._index[j - 1, j2 - 1])

    def pair(self, i: int) -> Tuple[int, int]:
        return int(self.rows[i]) + 1, int(self.cols[i]) + 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SymBasis) and other.n_sites == self.n_sites

    def __hash__(self) -> int:
        return hash(("SymBasis", self.n_sites))

    def __repr__(self) -> str:
        return f"SymBasis(n_sites={self.n_sites}, size={self.size})"


@lru_cache(maxsize=32)
def sym_basis(n_sites: int) -> SymBasis:
    return SymBasis(n_sites)


class TwoBosonState(BaseModel):
    """Normalized amplitudes over a SymBasis."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    amplitudes: np.ndarray
    basis: SymBasis

    @field_validator("amplitudes", mode="before")
    @classmethod
    def copy_amplitudes(cls, value) -> np.ndarray:
        array = np.array(value, dtype=complex)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_amplitudes(self) -> "TwoBosonState":
        if self.amplitudes.shape != (self.basis.size,):
            raise ValueError(
                f"expected {self.basis.size} amplitudes, got shape {self.amplitudes.shape}"
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > STATE_NORM_GUARD:
            raise ValueError(f"two-boson state is not normalized (norm={norm:.12f})")
        return self

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray, n_sites: int) -> "TwoBosonState":
        return cls(amplitudes=np.array(amplitudes, dtype=complex), basis=sym_basis(n_sites))

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites


class CorrelationMatrix(BaseModel):
    """Second-order correlator Gamma_{q,r} over the chain sites."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    gamma: np.ndarray

    @property
    def gamma_max(self) -> float:
        return float(np.max(np.diag(self.gamma)))


class ObservableRecord(BaseModel):
    """Observables of one state at one instant; one CSV row."""

    model_config = ConfigDict(frozen=True)

    t: float
    phi: float
    density: List[float]
    com: float
    gamma_max: Optional[float] = None
    nity: Optional[float] = None
    fidelity: Optional[float] = None

    @staticmethod
    def csv_header(n_sites: int) -> List[str]:
        return ["t", "phi", "com", "gamma_max", "nity", "fidelity"] + [
            f"density_{j}" for j in range(1, n_sites + 1)
        ]

    def csv_values(self) -> List[Optional[float]]:
        return [self.t, self.phi, self.com, self.gamma_max, self.nity, self.fidelity, *self.density]
