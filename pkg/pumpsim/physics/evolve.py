"""Time propagation of one and two non-interacting bosons.

Single-particle step operators are built in batches: every record interval
is covered by an equal number of steps, the Hamiltonians of that interval are
diagonalized together and the step unitaries are multiplied into one
interval propagator. The two-boson tensor is carried as Psi -> P Psi P^T.
"""
import math
from typing import Callable, Optional, Tuple, Union

import numpy as np

from pumpsim.core.constants import (
    DEFAULT_RECORDS_PER_STAGE,
    STATE_NORM_GUARD,
    UNITARITY_TOLERANCE,
)
from pumpsim.core.exceptions import IntegrationError, NonUnitaryError, ValidationError
from pumpsim.core.logging_config import get_logger
from pumpsim.physics.fock2 import from_tensor, observe, state_tensor
from pumpsim.physics.model import (
    build_hamiltonian,
    hamiltonian_stack,
    phase_at,
    pump_period,
)
from pumpsim.schemas.evolution import (
    EvolutionResult,
    PropagatorConfig,
    PropagatorMethod,
    SingleParticleState,
)
from pumpsim.schemas.fock import ObservableRecord, TwoBosonState
from pumpsim.schemas.model import (
    DisorderRealization,
    PhaseSchedule,
    RiceMeleParams,
)

logger = get_logger(__name__)

# Commutator-free fourth-order exponential integrator
MAGNUS4_A1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
MAGNUS4_A2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0
MAGNUS4_NODES = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)

# Steps diagonalized together
MAX_BATCH = 1024

Observer = Callable[[float, float, Union[np.ndarray, TwoBosonState]], None]


def _exponentials(hamiltonians: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a batch of Hermitian matrices."""
    energies, vectors = np.linalg.eigh(hamiltonians)
    phases = np.exp(-1j * dt * energies)
    return np.einsum("nij,nj,nkj->nik", vectors, phases, np.conj(vectors))


class _StepEngine:
    """Step operators of one (params, schedule, disorder) evolution."""

    def __init__(
        self,
        params: RiceMeleParams,
        schedule: PhaseSchedule,
        disorder: Optional[DisorderRealization],
        method: PropagatorMethod,
    ):
        self.params = params
        self.schedule = schedule
        self.disorder = disorder
        self.method = method

    def _stack(self, times: np.ndarray) -> np.ndarray:
        return hamiltonian_stack(self.params, phase_at(self.schedule, self.params, times), self.disorder)

    def step_operators(self, starts: np.ndarray, dt: float) -> np.ndarray:
        """Single-particle operators of the steps beginning at ``starts``."""
        if self.method == PropagatorMethod.MIDPOINT:
            return _exponentials(self._stack(starts + 0.5 * dt), dt)

        if self.method == PropagatorMethod.MAGNUS4:
            h1 = self._stack(starts + MAGNUS4_NODES[0] * dt)
            h2 = self._stack(starts + MAGNUS4_NODES[1] * dt)
            first = _exponentials(MAGNUS4_A2 * h1 + MAGNUS4_A1 * h2, dt)
            second = _exponentials(MAGNUS4_A1 * h1 + MAGNUS4_A2 * h2, dt)
            return second @ first

        # RK4 applied to the identity.
        h0 = self._stack(starts)
        hm = self._stack(starts + 0.5 * dt)
        h1 = self._stack(starts + dt)
        identity = np.eye(self.params.n_sites)
        k1 = -1j * h0
        k2 = -1j * hm @ (identity + 0.5 * dt * k1)
        k3 = -1j * hm @ (identity + 0.5 * dt * k2)
        k4 = -1j * h1 @ (identity + dt * k3)
        return identity + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def rk4_tensor(self, psi: np.ndarray, starts: np.ndarray, dt: float) -> np.ndarray:
        """Two-boson RK4 steps, dPsi/dt = -i (H Psi + Psi H^T)."""
        h0 = self._stack(starts)
        hm = self._stack(starts + 0.5 * dt)
        h1 = self._stack(starts + dt)

        def rhs(h: np.ndarray, x: np.ndarray) -> np.ndarray:
            return -1j * (h @ x + x @ h.T)

        for i in range(starts.shape[0]):
            k1 = rhs(h0[i], psi)
            k2 = rhs(hm[i], psi + 0.5 * dt * k1)
            k3 = rhs(hm[i], psi + 0.5 * dt * k2)
            k4 = rhs(h1[i], psi + dt * k3)
            psi = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return psi


def _product(operators: np.ndarray) -> np.ndarray:
    """operators[-1] @ ... @ operators[0]."""
    total = operators[0]
    for op in operators[1:]:
        total = op @ total
    return total


def _unitarity_deviation(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def _check_span(t_span: Tuple[float, float]) -> Tuple[float, float]:
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 < 0 or t1 < t0:
        raise ValidationError(f"invalid time span ({t0}, {t1})")
    return t0, t1


def _propagate(
    params: RiceMeleParams,
    schedule: PhaseSchedule,
    disorder: Optional[DisorderRealization],
    state: Union[np.ndarray, TwoBosonState],
    t_span: Tuple[float, float],
    config: PropagatorConfig,
    n_records: int,
    target,
    time_offset: float,
    observer: Optional[Observer],
) -> EvolutionResult:
    t0, t1 = _check_span(t_span)
    if n_records < 2:
        raise ValidationError("at least two records are needed")
    two_boson = isinstance(state, TwoBosonState)
    n_sites = params.n_sites
    if two_boson and state.n_sites != n_sites:
        raise ValidationError(f"state has {state.n_sites} sites, chain has {n_sites}")

    def record(t: float, current) -> ObservableRecord:
        phi = phase_at(schedule, params, t)
        if observer is not None:
            observer(t + time_offset, phi, current)
        return observe(current, t + time_offset, phi, target)

    duration = t1 - t0
    propagator = np.eye(n_sites, dtype=complex)
    if duration == 0:
        return EvolutionResult(
            final_state=state,
            trajectory=[record(t0, state)],
            single_particle_propagator=propagator,
            n_steps=0,
            norm_drift=0.0,
        )

    intervals = n_records - 1
    period = pump_period(schedule, params)
    n_steps = config.steps_for(duration, period, multiple_of=intervals)
    per_interval = n_steps // intervals
    dt = duration / n_steps
    engine = _StepEngine(params, schedule, disorder, config.method)
    logger.debug(
        f"Propagating {'two bosons' if two_boson else 'one particle'} over [{t0:.6g}, {t1:.6g}] "
        f"with {n_steps} {config.method.value} steps"
    )

    if two_boson:
        current = state_tensor(state)
    else:
        current = np.asarray(state, dtype=complex).copy()
    trajectory = [record(t0, state)]
    drift = 0.0

    for interval in range(intervals):
        first_step = interval * per_interval
        block = np.eye(n_sites, dtype=complex)
        for offset in range(0, per_interval, MAX_BATCH):
            count = min(MAX_BATCH, per_interval - offset)
            starts = t0 + dt * np.arange(first_step + offset, first_step + offset + count)
            block = _product(engine.step_operators(starts, dt)) @ block
            if two_boson and config.method == PropagatorMethod.RK4:
                current = engine.rk4_tensor(current, starts, dt)
        propagator = block @ propagator

        if not two_boson:
            current = block @ current
        elif config.method != PropagatorMethod.RK4:
            current = block @ current @ block.T

        t_end = t0 + dt * (first_step + per_interval)
        drift = abs(float(np.linalg.norm(current)) - 1.0)
        if drift > config.tolerance:
            raise IntegrationError("norm drift exceeds tolerance", t=t_end, drift=drift)

        if two_boson:
            snapshot = TwoBosonState(amplitudes=from_tensor(current, state.basis), basis=state.basis)
        else:
            snapshot = current.copy()
        trajectory.append(record(t_end if interval < intervals - 1 else t1, snapshot))

    deviation = _unitarity_deviation(propagator)
    if deviation > max(config.tolerance, UNITARITY_TOLERANCE):
        raise IntegrationError("propagator is not unitary", t=t1, drift=deviation)

    return EvolutionResult(
        final_state=snapshot,
        trajectory=trajectory,
        single_particle_propagator=propagator,
        n_steps=n_steps,
        norm_drift=drift,
    )


def evolve_single(
    params: RiceMeleParams,
    schedule: PhaseSchedule,
    disorder: Optional[DisorderRealization],
    psi0: SingleParticleState,
    t_span: Tuple[float, float],
    config: Optional[PropagatorConfig] = None,
    n_records: int = DEFAULT_RECORDS_PER_STAGE,
    target: Optional[SingleParticleState] = None,
    time_offset: float = 0.0,
    observer: Optional[Observer] = None,
) -> EvolutionResult:
    """Integrate i d psi/dt = H(phi(t)) psi for one particle.

    Args:
        params: Chain parameters
        schedule: Phase schedule driving the pump
        disorder: Static on-site energies (clean chain when omitted)
        psi0: Normalized initial vector over the 2L sites
        t_span: (t0, t1) in schedule time
        config: Propagator settings
        n_records: Evenly spaced observation times including both ends
        target: Optional state for the fidelity column
        time_offset: Added to the recorded times
        observer: Called with (t, phi, state) at every record

    Returns:
        EvolutionResult with the final vector and accumulated propagator

    Raises:
        ValidationError: If psi0 is not normalized or has the wrong length
        IntegrationError: If the norm drifts beyond the configured tolerance
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (params.n_sites,):
        raise ValidationError(f"expected a vector of {params.n_sites} amplitudes, got {psi0.shape}")
    if abs(float(np.linalg.norm(psi0)) - 1.0) > STATE_NORM_GUARD:
        raise ValidationError("initial state is not normalized")
    return _propagate(
        params, schedule, disorder, psi0, t_span, config or PropagatorConfig(), n_records, target,
        time_offset, observer,
    )


def evolve_two_boson(
    params: RiceMeleParams,
    schedule: PhaseSchedule,
    disorder: Optional[DisorderRealization],
    state0: TwoBosonState,
    t_span: Tuple[float, float],
    config: Optional[PropagatorConfig] = None,
    n_records: int = DEFAULT_RECORDS_PER_STAGE,
    target: Optional[TwoBosonState] = None,
    time_offset: float = 0.0,
    observer: Optional[Observer] = None,
) -> EvolutionResult:
    """Evolve two non-interacting bosons under the symmetric lift of H(t).

    Same arguments as evolve_single with a TwoBosonState in place of the
    vector; the accumulated single-particle propagator is returned for the
    permanent oracle.
    """
    return _propagate(
        params, schedule, disorder, state0, t_span, config or PropagatorConfig(), n_records, target,
        time_offset, observer,
    )


def permanent_oracle(single_propagator: np.ndarray, state0: TwoBosonState) -> TwoBosonState:
    """Two-boson output from 2x2 permanents of the single-particle propagator.

    out_pq = sum_{i<=j} (U_pi U_qj + U_pj U_qi) / sqrt((1 + d_pq)(1 + d_ij)) a_ij

    Raises:
        NonUnitaryError: If the propagator is not unitary to 1e-8
        ValidationError: If its size does not match the state's chain
    """
    u = np.asarray(single_propagator, dtype=complex)
    basis = state0.basis
    if u.shape != (basis.n_sites, basis.n_sites):
        raise ValidationError(f"propagator shape {u.shape} does not match {basis.n_sites} sites")
    deviation = _unitarity_deviation(u)
    if deviation > UNITARITY_TOLERANCE:
        raise NonUnitaryError(deviation)

    rows, cols = basis.rows, basis.cols
    permanents = u[np.ix_(rows, rows)] * u[np.ix_(cols, cols)] + u[np.ix_(rows, cols)] * u[np.ix_(cols, rows)]
    weight = np.where(basis.diagonal, 2.0, 1.0)
    permanents /= np.sqrt(np.outer(weight, weight))
    return TwoBosonState(amplitudes=permanents @ state0.amplitudes, basis=basis)


def quench(params: RiceMeleParams, new_phi0: float) -> RiceMeleParams:
    """Sudden change of phi0; states are carried over untouched by the caller."""
    return params.model_copy(update={"phi0": float(new_phi0)})


def band_population(
    params: RiceMeleParams,
    phi: float,
    disorder: Optional[DisorderRealization],
    psi: SingleParticleState,
    band: int,
) -> float:
    """Weight of ``psi`` on the lower (band 1) or upper (band 2) half of the instantaneous spectrum."""
    if band not in (1, 2):
        raise ValidationError("band must be 1 or 2")
    _, vectors = np.linalg.eigh(build_hamiltonian(params, phi, disorder).matrix)
    half = params.L
    selected = vectors[:, :half] if band == 1 else vectors[:, half:]
    return float(np.sum(np.abs(selected.conj().T @ np.asarray(psi)) ** 2))
