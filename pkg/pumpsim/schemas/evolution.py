import math
from enum import Enum
from typing import List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from pumpsim.core.constants import (
    DEFAULT_NORM_TOLERANCE,
    DEFAULT_STEPS_PER_CYCLE,
    MIN_STEPS_PER_CYCLE,
)
from pumpsim.schemas.fock import ObservableRecord, TwoBosonState

# Single-particle states are plain complex vectors over the 2L sites.
SingleParticleState = np.ndarray


class PropagatorMethod(str, Enum):
    MIDPOINT = "midpoint"
    MAGNUS4 = "magnus4"
    RK4 = "rk4"


class PropagatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    steps_per_cycle: int = Field(DEFAULT_STEPS_PER_CYCLE, ge=MIN_STEPS_PER_CYCLE)
    method: PropagatorMethod = PropagatorMethod.MIDPOINT
    tolerance: float = Field(DEFAULT_NORM_TOLERANCE, gt=0)

    def steps_for(self, duration: float, period: float, multiple_of: int = 1) -> int:
        """Number of equal steps covering ``duration``, rounded up to a multiple of ``multiple_of``."""
        if duration <= 0:
            return 0
        wanted = max(1, math.ceil(self.steps_per_cycle * duration / period))
        return multiple_of * math.ceil(wanted / multiple_of)

    def refined(self, factor: int = 2) -> "PropagatorConfig":
        return self.model_copy(update={"steps_per_cycle": self.steps_per_cycle * factor})


class EvolutionResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    final_state: Union[TwoBosonState, np.ndarray]
    trajectory: List[ObservableRecord]
    single_particle_propagator: np.ndarray
    n_steps: int
    norm_drift: float
