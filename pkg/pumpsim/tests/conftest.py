import math

import pytest

from pumpsim.schemas.evolution import PropagatorConfig
from pumpsim.schemas.model import PhaseSchedule, RiceMeleParams


@pytest.fixture
def params():
    return RiceMeleParams()


@pytest.fixture
def gentle_params():
    # Small gap-rich chain, cheap to propagate.
    return RiceMeleParams(L=4, delta0=1.0, Delta0=2.0)


@pytest.fixture
def linear_schedule():
    return PhaseSchedule.linear(0.08)


@pytest.fixture
def gap_schedule():
    return PhaseSchedule.gap_adaptive(0.03)


@pytest.fixture
def coarse():
    return PropagatorConfig(steps_per_cycle=1000)


@pytest.fixture
def half_pi():
    return 0.5 * math.pi
