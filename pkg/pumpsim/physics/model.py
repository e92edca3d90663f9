"""Real-space Rice-Mele Hamiltonians, pump phase schedules and disorder sampling."""
import math
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from pumpsim.core.constants import GAP_SCAN_POINTS
from pumpsim.core.exceptions import DimensionMismatchError, ValidationError
from pumpsim.core.logging_config import get_logger
from pumpsim.schemas.model import (
    DisorderKind,
    DisorderRealization,
    DisorderSpec,
    PhaseSchedule,
    RiceMeleParams,
    ScheduleKind,
    SingleParticleHamiltonian,
)

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]
TWO_PI = 2.0 * math.pi


def modulation(params: RiceMeleParams, phi: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Return (J1, J2, Delta) at phase ``phi``; scalars in, scalars out."""
    phi_arr = np.asarray(phi, dtype=float)
    s = np.sin(phi_arr)
    j1 = params.J + params.delta0 * s
    j2 = params.J - params.delta0 * s
    delta = params.Delta0 * np.cos(phi_arr)
    if phi_arr.ndim == 0:
        return float(j1), float(j2), float(delta)
    return j1, j2, delta


def _energies(params: RiceMeleParams, disorder: Optional[DisorderRealization]) -> np.ndarray:
    if disorder is None:
        return np.zeros(params.n_sites)
    if disorder.n_sites != params.n_sites:
        raise DimensionMismatchError(params.n_sites, disorder.n_sites, "disorder vector")
    return disorder.energies


def hamiltonian_stack(
    params: RiceMeleParams,
    phis: ArrayLike,
    disorder: Optional[DisorderRealization] = None,
) -> np.ndarray:
    """Real-space Hamiltonians for a batch of phases, shape (n, 2L, 2L).

    Open boundary: bond (s, s+1) carries -J1 for even 0-based s and -J2 for
    odd s; the diagonal is +Delta on even sites, -Delta on odd sites, plus
    the static disorder energies.
    """
    energies = _energies(params, disorder)
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    j1, j2, delta = modulation(params, phis)
    n_sites = params.n_sites

    sites = np.arange(n_sites)
    stagger = np.where(sites % 2 == 0, 1.0, -1.0)
    bonds = np.arange(n_sites - 1)

    stack = np.zeros((phis.shape[0], n_sites, n_sites))
    stack[:, sites, sites] = delta[:, None] * stagger[None, :] + energies[None, :]
    hopping = np.where(bonds % 2 == 0, -j1[:, None], -j2[:, None])
    stack[:, bonds, bonds + 1] = hopping
    stack[:, bonds + 1, bonds] = hopping
    return stack


def build_hamiltonian(
    params: RiceMeleParams,
    phi: float,
    disorder: Optional[DisorderRealization] = None,
    t: Optional[float] = None,
) -> SingleParticleHamiltonian:
    """Build the real-space single-particle Hamiltonian at one phase.

    Args:
        params: Chain parameters
        phi: Modulated phase
        disorder: Static on-site energies (clean chain when omitted)
        t: Optional time tag

    Returns:
        SingleParticleHamiltonian

    Raises:
        DimensionMismatchError: If the disorder vector does not have 2L entries
    """
    matrix = hamiltonian_stack(params, phi, disorder)[0]
    matrix.setflags(write=False)
    return SingleParticleHamiltonian(matrix=matrix, phi=float(phi), time_tag=t)


class PhaseTable:
    """One period of a gap-adaptive phase trajectory.

    ``advance(t)`` is phi(t) - phi0 for 0 <= t <= period and extends
    periodically by 2 pi per period.
    """

    def __init__(self, times: np.ndarray, advance: np.ndarray, rates: np.ndarray):
        self.spline = CubicHermiteSpline(times, advance, rates)
        self.t_max = float(times[-1])
        if advance[-1] > TWO_PI:
            self.period = float(
                brentq(lambda t: float(self.spline(t)) - TWO_PI, times[-2], times[-1], xtol=1e-14)
            )
        else:
            self.period = self.t_max
        self.n_steps = times.shape[0] - 1

    def advance(self, t: ArrayLike) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        cycles = np.floor(t / self.period)
        remainder = np.clip(t - cycles * self.period, 0.0, self.period)
        return TWO_PI * cycles + self.spline(remainder)

    def time_for(self, advance: float) -> float:
        """First time at which the phase has advanced by ``advance`` >= 0."""
        cycles = math.floor(advance / TWO_PI)
        remainder = advance - cycles * TWO_PI
        if remainder <= 0.0:
            return cycles * self.period
        t = brentq(lambda s: float(self.spline(s)) - remainder, 0.0, self.period, xtol=1e-14)
        return cycles * self.period + float(t)


@lru_cache(maxsize=64)
def _gap_table(
    J: float, delta0: float, Delta0: float, epsilon: float, phi0: float, steps_per_cycle: int
) -> PhaseTable:
    # Imported here: bloch builds on this module's modulation().
    from pumpsim.physics.bloch import analytic_gap

    params = RiceMeleParams(J=J, delta0=delta0, Delta0=Delta0, phi0=phi0)
    scan = np.linspace(0.0, math.pi, GAP_SCAN_POINTS, endpoint=False)
    g_max = float(np.max(analytic_gap(params, scan)))
    dt = TWO_PI / (steps_per_cycle * epsilon * g_max)

    def rate(phi: float) -> float:
        return epsilon * float(analytic_gap(params, phi))

    times = [0.0]
    phases = [phi0]
    rates = [rate(phi0)]
    phi = phi0
    t = 0.0
    # Classical RK4 in t; the last step overshoots phi0 + 2 pi.
    while phi - phi0 <= TWO_PI:
        k1 = rates[-1]
        k2 = rate(phi + 0.5 * dt * k1)
        k3 = rate(phi + 0.5 * dt * k2)
        k4 = rate(phi + dt * k3)
        phi += dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        t += dt
        times.append(t)
        phases.append(phi)
        rates.append(rate(phi))

    table = PhaseTable(np.array(times), np.array(phases) - phi0, np.array(rates))
    logger.debug(
        f"Gap-adaptive table: epsilon={epsilon}, steps={table.n_steps}, period={table.period:.10f}"
    )
    return table


def phase_table(schedule: PhaseSchedule, params: RiceMeleParams) -> PhaseTable:
    return _gap_table(
        params.J,
        params.delta0,
        params.Delta0,
        schedule.rate,
        schedule.start_phase(params),
        schedule.ode_steps_per_cycle,
    )


def phase_at(schedule: PhaseSchedule, params: RiceMeleParams, t: ArrayLike) -> ArrayLike:
    """Pump phase phi(t); accepts scalar or array times.

    Raises:
        ValidationError: If any time is negative
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValidationError("phase is only defined for t >= 0")
    phi0 = schedule.start_phase(params)
    if schedule.kind == ScheduleKind.LINEAR:
        phi = phi0 + schedule.rate * t_arr
    else:
        phi = phi0 + phase_table(schedule, params).advance(t_arr)
    if np.ndim(phi) == 0:
        return float(phi)
    return phi


def pump_period(schedule: PhaseSchedule, params: RiceMeleParams) -> float:
    """Time for the phase to advance by 2 pi."""
    if schedule.kind == ScheduleKind.LINEAR:
        return TWO_PI / schedule.rate
    return phase_table(schedule, params).period


def time_at_phase(schedule: PhaseSchedule, params: RiceMeleParams, phase: float) -> float:
    """First time at which phi(t) reaches ``phase``.

    Raises:
        ValidationError: If ``phase`` lies before the schedule's start phase
    """
    advance = phase - schedule.start_phase(params)
    if advance < 0:
        raise ValidationError(
            f"phase {phase:.6g} precedes the start phase {schedule.start_phase(params):.6g}"
        )
    if schedule.kind == ScheduleKind.LINEAR:
        return advance / schedule.rate
    return phase_table(schedule, params).time_for(advance)


def sample_seed(spec: DisorderSpec, sample_index: int) -> int:
    """Per-sample seed derived from (base_seed, sample_index)."""
    sequence = np.random.SeedSequence([spec.base_seed, sample_index])
    return int(sequence.generate_state(1, np.uint64)[0])


def sample_disorder(spec: DisorderSpec, n_sites: int, sample_index: int = 0) -> DisorderRealization:
    """Draw one disorder realization.

    The stream is a PCG64 generator seeded from (base_seed, sample_index), so
    the same arguments always produce the same energies on every platform.
    """
    if n_sites < 1:
        raise ValidationError("n_sites must be positive")
    if sample_index < 0:
        raise ValidationError("sample_index must be non-negative")
    seed = sample_seed(spec, sample_index)
    if spec.kind == DisorderKind.NONE:
        energies = np.zeros(n_sites)
    else:
        rng = np.random.Generator(np.random.PCG64(seed))
        if spec.kind == DisorderKind.UNIFORM:
            energies = spec.eta * rng.uniform(-1.0, 1.0, n_sites)
        else:
            energies = rng.normal(spec.mu, spec.sigma, n_sites)
    return DisorderRealization(energies=energies, seed=seed, sample_index=sample_index)
