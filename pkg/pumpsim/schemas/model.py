from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pumpsim.core.constants import (
    DEFAULT_BASE_SEED,
    DEFAULT_CELLS,
    DEFAULT_DELTA0,
    DEFAULT_J,
    DEFAULT_OFFSET0,
    DEFAULT_PHI0,
    MIN_CELLS,
    ODE_STEPS_PER_CYCLE,
)


class RiceMeleParams(BaseModel):
    """Static parameters of the modulated Rice-Mele chain."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    J: float = Field(DEFAULT_J, gt=0, description="Tunneling unit")
    delta0: float = Field(DEFAULT_DELTA0, description="Tunneling modulation amplitude")
    Delta0: float = Field(DEFAULT_OFFSET0, description="Staggered offset modulation amplitude")
    L: int = Field(DEFAULT_CELLS, ge=MIN_CELLS, description="Number of unit cells")
    phi0: float = Field(DEFAULT_PHI0, description="Initial modulated phase")

    @model_validator(mode="after")
    def check_gap_open(self) -> "RiceMeleParams":
        if self.delta0 == 0 or self.Delta0 == 0:
            raise ValueError("delta0 and Delta0 must both be nonzero or the gap closes")
        return self

    @property
    def n_sites(self) -> int:
        return 2 * self.L


class ScheduleKind(str, Enum):
    LINEAR = "linear"
    GAP_ADAPTIVE = "gap_adaptive"


class PhaseSchedule(BaseModel):
    """Rule producing the pump phase phi(t).

    ``rate`` is omega for the linear rule and epsilon for the gap-adaptive
    rule. When ``phi0`` is left unset the schedule starts from the
    parameters' ``phi0``, so a quench only has to touch the parameters.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ScheduleKind = ScheduleKind.LINEAR
    rate: float
    phi0: Optional[float] = None
    ode_steps_per_cycle: int = Field(ODE_STEPS_PER_CYCLE, ge=100)

    @field_validator("rate")
    @classmethod
    def check_rate(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("omega / epsilon must be positive")
        return value

    @classmethod
    def linear(cls, omega: float, phi0: Optional[float] = None) -> "PhaseSchedule":
        return cls(kind=ScheduleKind.LINEAR, rate=omega, phi0=phi0)

    @classmethod
    def gap_adaptive(cls, epsilon: float, phi0: Optional[float] = None) -> "PhaseSchedule":
        return cls(kind=ScheduleKind.GAP_ADAPTIVE, rate=epsilon, phi0=phi0)

    def start_phase(self, params: RiceMeleParams) -> float:
        return params.phi0 if self.phi0 is None else self.phi0


class DisorderKind(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"
    NORMAL = "normal"


class DisorderSpec(BaseModel):
    """Distribution of static on-site energies.

    Uniform: eta * r_j with r_j ~ U[-1, 1]. Normal: r_j ~ N(mu, sigma^2).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DisorderKind = DisorderKind.NONE
    eta: float = Field(0.0, ge=0)
    mu: float = 0.0
    sigma: float = Field(0.0, ge=0)
    base_seed: int = Field(DEFAULT_BASE_SEED, ge=0)

    @classmethod
    def uniform(cls, eta: float, base_seed: int = DEFAULT_BASE_SEED) -> "DisorderSpec":
        return cls(kind=DisorderKind.UNIFORM, eta=eta, base_seed=base_seed)

    @classmethod
    def normal(cls, sigma: float, mu: float = 0.0, base_seed: int = DEFAULT_BASE_SEED) -> "DisorderSpec":
        return cls(kind=DisorderKind.NORMAL, mu=mu, sigma=sigma, base_seed=base_seed)

    def with_amplitude(self, amplitude: float) -> "DisorderSpec":
        """Copy with eta (uniform) or sigma (normal) replaced."""
        if self.kind == DisorderKind.UNIFORM:
            return self.model_copy(update={"eta": amplitude})
        if self.kind == DisorderKind.NORMAL:
            return self.model_copy(update={"sigma": amplitude})
        if amplitude != 0:
            raise ValueError("a disorder-free spec only admits amplitude 0")
        return self

    @property
    def amplitude(self) -> float:
        if self.kind == DisorderKind.UNIFORM:
            return self.eta
        if self.kind == DisorderKind.NORMAL:
            return self.sigma
        return 0.0


class DisorderRealization(BaseModel):
    """One frozen vector of on-site energies."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    energies: np.ndarray
    seed: int
    sample_index: int = 0

    @field_validator("energies", mode="before")
    @classmethod
    def freeze_energies(cls, value) -> np.ndarray:
        array = np.array(value, dtype=float)
        if array.ndim != 1:
            raise ValueError("energies must be a vector")
        array.setflags(write=False)
        return array

    @classmethod
    def clean(cls, n_sites: int) -> "DisorderRealization":
        return cls(energies=np.zeros(n_sites), seed=0)

    @property
    def n_sites(self) -> int:
        return int(self.energies.shape[0])


class SingleParticleHamiltonian(BaseModel):
    """Real-space Hamiltonian at one instant (open boundary, tridiagonal)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    phi: float
    time_tag: Optional[float] = None
