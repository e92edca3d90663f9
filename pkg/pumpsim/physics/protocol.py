"""Staged pump experiments and their disorder-ensemble statistics."""
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from pumpsim.core.config import settings
from pumpsim.core.constants import (
    BEAM_SPLITTER_AMPLITUDE_TOLERANCE,
    DEFAULT_HOM_SCAN_AMPLITUDES,
    DEFAULT_SCAN_AMPLITUDES,
    HOM_INPUT_SITES,
    QUENCH_PHI0,
    UNIT_CELL_LENGTH,
)
from pumpsim.core.exceptions import SampleError, ValidationError
from pumpsim.core.logging_config import get_logger
from pumpsim.physics.bloch import band_structure, chern_numbers, wannier_state
from pumpsim.physics.evolve import evolve_single, evolve_two_boson, permanent_oracle, quench
from pumpsim.physics.fock2 import center_of_mass, correlation, make_state, noonity, wannier_pair_state
from pumpsim.physics.model import pump_period, sample_disorder, sample_seed, time_at_phase
from pumpsim.schemas.bloch import BandStructure, ChernResult
from pumpsim.schemas.evolution import PropagatorConfig
from pumpsim.schemas.experiment import (
    BeamSplitterReport,
    DisorderScanRow,
    EnsembleStats,
    ExperimentKind,
    ExperimentSpec,
    InitialStateKind,
    ScanStage,
    StageClock,
)
from pumpsim.schemas.fock import ObservableRecord, TwoBosonState
from pumpsim.schemas.model import DisorderRealization, PhaseSchedule, RiceMeleParams

logger = get_logger(__name__)

HALF_PI = 0.5 * math.pi

# Beam-splitter acceptance beyond the amplitude tolerance
MAX_RELATIVE_SIGN = -0.9
MIN_RETURN_WEIGHT = 0.95
MIN_OUTPUT_NITY = 1.9
MIN_NO_QUENCH_FIDELITY = 0.95

SNAPSHOT_NAMES = ("start", "after_pump", "after_interference", "after_distribution")

Trace = Dict[str, object]


def free_schedule(schedule: PhaseSchedule, params: RiceMeleParams) -> Tuple[PhaseSchedule, RiceMeleParams]:
    """Move the schedule's start phase into the parameters so that quenches act on parameters only."""
    start = schedule.start_phase(params)
    return schedule.model_copy(update={"phi0": None}), quench(params, start)


def pumped_site(site: int, n_cycles: int, n_sites: int) -> Optional[int]:
    """Where an upper-band (odd) or lower-band (even) site ends after n cycles from phi0 = 0."""
    shift = UNIT_CELL_LENGTH * n_cycles
    moved = site + shift if site % 2 == 1 else site - shift
    return moved if 1 <= moved <= n_sites else None


def _site_vector(site: int, n_sites: int) -> np.ndarray:
    psi = np.zeros(n_sites, dtype=complex)
    psi[site - 1] = 1.0
    return psi


def _wannier_for_site(params: RiceMeleParams, site: int):
    band = 2 if site % 2 == 1 else 1
    return wannier_state(params, params.phi0, band, (site + 1) // 2)


def initial_single_state(spec: ExperimentSpec) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Initial vector and the ideal pumped target (None when it leaves the chain)."""
    params = spec.params
    site = spec.initial_sites[0]
    moved = pumped_site(site, spec.n_cycles, params.n_sites)
    if spec.initial_state == InitialStateKind.WANNIER:
        psi = np.array(_wannier_for_site(params, site).amplitudes)
        target = None if moved is None else np.array(_wannier_for_site(params, moved).amplitudes)
        return psi, target
    target = None if moved is None else _site_vector(moved, params.n_sites)
    return _site_vector(site, params.n_sites), target


def initial_two_boson_state(spec: ExperimentSpec) -> TwoBosonState:
    params = spec.params
    a, b = spec.site_pair
    if spec.initial_state == InitialStateKind.WANNIER:
        return wannier_pair_state(_wannier_for_site(params, a), _wannier_for_site(params, b))
    return make_state(a, b, params.n_sites)


def fock_target(spec: ExperimentSpec) -> Optional[TwoBosonState]:
    """Ideal pumped state, e.g. |9,9> for |7,7> after one cycle."""
    n_sites = spec.params.n_sites
    a, b = (pumped_site(site, spec.n_cycles, n_sites) for site in spec.site_pair)
    if a is None or b is None:
        return None
    if spec.initial_state == InitialStateKind.WANNIER:
        return wannier_pair_state(_wannier_for_site(spec.params, a), _wannier_for_site(spec.params, b))
    return make_state(a, b, n_sites)


def stage_clock(spec: ExperimentSpec) -> StageClock:
    """Boundaries {0, nT_p, nT_p + tau, 2nT_p + tau} of the three-stage protocol."""
    schedule, params = free_schedule(spec.schedule, spec.params)
    post = quench(params, spec.quench_phi0)
    period = pump_period(schedule, params)
    post_period = pump_period(schedule, post)
    tau = time_at_phase(schedule, post, spec.quench_phi0 + HALF_PI)
    n = spec.n_cycles
    boundaries = (0.0, n * period, n * period + tau, n * period + tau + n * post_period)
    return StageClock(boundaries=boundaries, tau=tau, period=period, n_cycles=n)


def _trace(records: Sequence[ObservableRecord], seed: int) -> Trace:
    def column(name: str) -> Optional[np.ndarray]:
        values = [getattr(r, name) for r in records]
        return None if values[0] is None else np.array(values, dtype=float)

    return {
        "seed": seed,
        "times": np.array([r.t for r in records]),
        "phases": np.array([r.phi for r in records]),
        "density": np.array([r.density for r in records]),
        "com": np.array([r.com for r in records]),
        "gamma_max": column("gamma_max"),
        "nity": column("nity"),
        "fidelity": column("fidelity"),
        "snapshots": {},
    }


def _single_pump_job(spec: ExperimentSpec, disorder: DisorderRealization) -> Trace:
    psi0, target = initial_single_state(spec)
    period = pump_period(spec.schedule, spec.params)
    result = evolve_single(
        spec.params,
        spec.schedule,
        disorder,
        psi0,
        (0.0, spec.n_cycles * period),
        spec.propagator,
        spec.sample_times,
        target=target,
    )
    return _trace(result.trajectory, disorder.seed)


def _fock_pump_job(spec: ExperimentSpec, disorder: DisorderRealization) -> Trace:
    state0 = initial_two_boson_state(spec)
    period = pump_period(spec.schedule, spec.params)
    result = evolve_two_boson(
        spec.params,
        spec.schedule,
        disorder,
        state0,
        (0.0, spec.n_cycles * period),
        spec.propagator,
        spec.sample_times,
        target=fock_target(spec),
    )
    trace = _trace(result.trajectory, disorder.seed)
    trace["snapshots"] = {
        "start": correlation(state0).gamma,
        "end": correlation(result.final_state).gamma,
    }
    return trace


def _hom_job(spec: ExperimentSpec, disorder: DisorderRealization) -> Trace:
    schedule, params = free_schedule(spec.schedule, spec.params)
    period = pump_period(schedule, params)
    post = quench(params, spec.quench_phi0)
    tau = time_at_phase(schedule, post, spec.quench_phi0 + HALF_PI)
    state0 = initial_two_boson_state(spec)
    result = evolve_two_boson(
        post,
        schedule,
        disorder,
        state0,
        (0.0, tau),
        spec.propagator,
        spec.sample_times,
        time_offset=spec.n_cycles * period,
    )
    trace = _trace(result.trajectory, disorder.seed)
    trace["snapshots"] = {
        "start": correlation(state0).gamma,
        "end": correlation(result.final_state).gamma,
    }
    return trace


def _full_protocol_job(spec: ExperimentSpec, disorder: DisorderRealization) -> Trace:
    schedule, params = free_schedule(spec.schedule, spec.params)
    n = spec.n_cycles
    period = pump_period(schedule, params)
    state0 = initial_two_boson_state(spec)

    pump = evolve_two_boson(
        params, schedule, disorder, state0, (0.0, n * period), spec.propagator, spec.sample_times
    )

    post = quench(params, spec.quench_phi0)
    tau = time_at_phase(schedule, post, spec.quench_phi0 + HALF_PI)
    interfere = evolve_two_boson(
        post,
        schedule,
        disorder,
        pump.final_state,
        (0.0, tau),
        spec.propagator,
        spec.sample_times,
        time_offset=n * period,
    )

    post_period = pump_period(schedule, post)
    distribute = evolve_two_boson(
        post,
        schedule,
        disorder,
        interfere.final_state,
        (tau, tau + n * post_period),
        spec.propagator,
        spec.sample_times,
        time_offset=n * period,
    )

    # Stage boundaries appear once, with the record of the stage that ends there.
    records = pump.trajectory + interfere.trajectory[1:] + distribute.trajectory[1:]
    trace = _trace(records, disorder.seed)
    states = (state0, pump.final_state, interfere.final_state, distribute.final_state)
    trace["snapshots"] = {name: correlation(s).gamma for name, s in zip(SNAPSHOT_NAMES, states)}
    return trace


def _guarded(job: Callable[[ExperimentSpec, DisorderRealization], Trace], spec: ExperimentSpec, index: int):
    """Run one sample; failures come back as text so they survive worker processes."""
    disorder = sample_disorder(spec.disorder, spec.params.n_sites, index)
    try:
        return job(spec, disorder), None, disorder.seed
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}", disorder.seed


def _run_ensemble(
    job: Callable[[ExperimentSpec, DisorderRealization], Trace],
    spec: ExperimentSpec,
    workers: Optional[int],
) -> List[Trace]:
    n_jobs = workers or settings.workers
    logger.info(f"Running {spec.kind.value}: {spec.n_samples} samples on {n_jobs} workers")
    outcomes = Parallel(n_jobs=n_jobs)(
        delayed(_guarded)(job, spec, index) for index in range(spec.n_samples)
    )
    traces = []
    for index, (trace, error, seed) in enumerate(outcomes):
        if error is not None:
            logger.error(f"Sample {index} (seed {seed}) failed: {error}")
            raise SampleError(error, sample_index=index, seed=seed)
        logger.debug(f"Sample {index} (seed {seed}) done")
        traces.append(trace)
    return traces


def _mean_std(traces: List[Trace], key: str) -> Tuple[Optional[list], Optional[list]]:
    if traces[0][key] is None:
        return None, None
    stacked = np.stack([trace[key] for trace in traces])
    return stacked.mean(axis=0).tolist(), stacked.std(axis=0).tolist()


def aggregate(
    kind: ExperimentKind, traces: List[Trace], clock: Optional[StageClock] = None
) -> EnsembleStats:
    """Ordered reduction of per-sample traces into ensemble mean and standard deviation."""
    shifts = np.stack([(trace["com"] - trace["com"][0]) / UNIT_CELL_LENGTH for trace in traces])
    mean_density, std_density = _mean_std(traces, "density")
    mean_gamma, std_gamma = _mean_std(traces, "gamma_max")
    mean_nity, std_nity = _mean_std(traces, "nity")
    mean_fidelity, std_fidelity = _mean_std(traces, "fidelity")

    snapshots = {}
    for name in traces[0]["snapshots"]:
        snapshots[name] = np.mean([trace["snapshots"][name] for trace in traces], axis=0).tolist()

    def finals(key: str) -> Optional[List[float]]:
        if traces[0][key] is None:
            return None
        return [float(trace[key][-1]) for trace in traces]

    return EnsembleStats(
        kind=kind,
        n_sites=int(traces[0]["density"].shape[1]),
        n_samples=len(traces),
        times=traces[0]["times"].tolist(),
        phases=traces[0]["phases"].tolist(),
        mean_density=mean_density,
        std_density=std_density,
        mean_com_shift=shifts.mean(axis=0).tolist(),
        std_com_shift=shifts.std(axis=0).tolist(),
        mean_gamma_max=mean_gamma,
        std_gamma_max=std_gamma,
        mean_nity=mean_nity,
        std_nity=std_nity,
        mean_fidelity=mean_fidelity,
        std_fidelity=std_fidelity,
        final_com_shift=shifts[:, -1].tolist(),
        final_fidelity=finals("fidelity"),
        final_nity=finals("nity"),
        seeds=[int(trace["seed"]) for trace in traces],
        snapshots=snapshots,
        stage_clock=clock,
    )


def mean_records(stats: EnsembleStats) -> List[ObservableRecord]:
    """Ensemble-mean observables as one record per time point.

    The center of mass is taken from the mean density, which equals the
    sample average since X is linear in the density.
    """

    def at(values: Optional[List[float]], i: int) -> Optional[float]:
        return None if values is None else values[i]

    return [
        ObservableRecord(
            t=t,
            phi=stats.phases[i],
            density=stats.mean_density[i],
            com=center_of_mass(np.asarray(stats.mean_density[i])),
            gamma_max=at(stats.mean_gamma_max, i),
            nity=at(stats.mean_nity, i),
            fidelity=at(stats.mean_fidelity, i),
        )
        for i, t in enumerate(stats.times)
    ]


def _require(spec: ExperimentSpec, *kinds: ExperimentKind) -> None:
    if spec.kind not in kinds:
        raise ValidationError(f"experiment kind {spec.kind.value} cannot run here")


def run_single_pump(spec: ExperimentSpec, workers: Optional[int] = None) -> EnsembleStats:
    """Single-particle pump from a site or Wannier state, one ensemble over disorder."""
    _require(spec, ExperimentKind.SINGLE_PUMP)
    return aggregate(spec.kind, _run_ensemble(_single_pump_job, spec, workers))


def run_fock_pump(spec: ExperimentSpec, workers: Optional[int] = None) -> EnsembleStats:
    """Pump a two-boson state for n cycles per sample.

    Fidelity is measured against the ideally pumped Fock state when it stays
    inside the chain.
    """
    _require(spec, ExperimentKind.FOCK_PUMP, ExperimentKind.DISORDER_SCAN)
    return aggregate(ExperimentKind.FOCK_PUMP, _run_ensemble(_fock_pump_job, spec, workers))


def run_hom(spec: ExperimentSpec, workers: Optional[int] = None) -> EnsembleStats:
    """Post-quench interference stage of duration tau, recorded from t = nT_p."""
    _require(spec, ExperimentKind.HOM, ExperimentKind.DISORDER_SCAN)
    return aggregate(ExperimentKind.HOM, _run_ensemble(_hom_job, spec, workers))


def run_full_protocol(spec: ExperimentSpec, workers: Optional[int] = None) -> EnsembleStats:
    """Pump, quench, interfere and pump again, one static realization per sample."""
    _require(spec, ExperimentKind.FULL_PROTOCOL)
    clock = stage_clock(spec)
    logger.info(f"Stage boundaries: {', '.join(f'{b:.6g}' for b in clock.boundaries)}")
    return aggregate(spec.kind, _run_ensemble(_full_protocol_job, spec, workers), clock)


def _scan_spec(spec: ExperimentSpec, amplitude: float, kind: ExperimentKind) -> ExperimentSpec:
    try:
        disorder = spec.disorder.with_amplitude(amplitude)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    return spec.model_copy(update={"disorder": disorder, "kind": kind})


def _moments(values: Optional[List[float]]) -> Tuple[Optional[float], Optional[float]]:
    if values is None:
        return None, None
    return float(np.mean(values)), float(np.std(values))


def _scan_row(amplitude: float, stats: EnsembleStats) -> DisorderScanRow:
    mean_f, std_f = _moments(stats.final_fidelity)
    mean_p, std_p = _moments(stats.final_com_shift)
    mean_n, std_n = _moments(stats.final_nity)
    return DisorderScanRow(
        amplitude=amplitude,
        mean_fidelity=mean_f,
        std_fidelity=std_f,
        mean_com_shift=mean_p,
        std_com_shift=std_p,
        mean_nity=mean_n,
        std_nity=std_n,
    )


def run_hom_scan(
    spec: ExperimentSpec, amplitudes: Optional[Sequence[float]] = None, workers: Optional[int] = None
) -> List[DisorderScanRow]:
    """Final NOONity of the interference stage against disorder amplitude."""
    amplitudes = amplitudes or spec.amplitudes or DEFAULT_HOM_SCAN_AMPLITUDES
    rows = []
    for amplitude in amplitudes:
        stats = run_hom(_scan_spec(spec, amplitude, ExperimentKind.HOM), workers)
        rows.append(_scan_row(amplitude, stats))
        logger.info(f"HOM scan amplitude {amplitude}: mean Nity {rows[-1].mean_nity:.4f}")
    return rows


def run_disorder_scan(
    spec: ExperimentSpec, amplitudes: Optional[Sequence[float]] = None, workers: Optional[int] = None
) -> List[DisorderScanRow]:
    """Fidelity and pumped distance of the Fock pump against disorder amplitude.

    With ``scan_stage`` set to hom the interference stage is scanned instead.
    """
    if any(a < 0 for a in amplitudes or ()):
        raise ValidationError("disorder amplitudes must be non-negative")
    if spec.scan_stage == ScanStage.HOM:
        return run_hom_scan(spec, amplitudes, workers)
    amplitudes = amplitudes or spec.amplitudes or DEFAULT_SCAN_AMPLITUDES
    rows = []
    for amplitude in amplitudes:
        stats = run_fock_pump(_scan_spec(spec, amplitude, ExperimentKind.FOCK_PUMP), workers)
        rows.append(_scan_row(amplitude, stats))
        logger.info(f"Fock scan amplitude {amplitude}: mean F {rows[-1].mean_fidelity}")
    return rows


def run_chern_check(spec: ExperimentSpec) -> Tuple[ChernResult, BandStructure]:
    n_k, n_t = spec.chern_grid
    result = chern_numbers(spec.params, n_k, n_t)
    logger.info(f"Chern numbers: nu1={result.nu1:+d} nu2={result.nu2:+d} on {n_k}x{n_t}")
    return result, band_structure(spec.params)


def beam_splitter_check(
    params: RiceMeleParams,
    schedule: PhaseSchedule,
    disorder: Optional[DisorderRealization] = None,
    sites: Tuple[int, int] = HOM_INPUT_SITES,
    config: Optional[PropagatorConfig] = None,
    quench_phi0: float = QUENCH_PHI0,
) -> BeamSplitterReport:
    """Check that the post-quench half sweep acts as a balanced beam splitter on a dimer.

    Args:
        params: Chain parameters before the quench
        schedule: Gap-adaptive schedule
        disorder: Optional static energies (clean by default)
        sites: The dimer (2l-1, 2l)
        config: Propagator settings
        quench_phi0: Phase the quench jumps to

    Returns:
        BeamSplitterReport with single-particle amplitudes and two-particle checks
    """
    a, b = sites
    schedule, base = free_schedule(schedule, params)
    post = quench(base, quench_phi0)
    tau = time_at_phase(schedule, post, quench_phi0 + HALF_PI)

    start = np.zeros(base.n_sites, dtype=complex)
    start[a - 1] = 1.0
    u = evolve_single(post, schedule, disorder, start, (0.0, tau), config, n_records=2).single_particle_propagator
    ia, ib = a - 1, b - 1

    from_a = (float(abs(u[ia, ia])), float(abs(u[ib, ia])))
    from_b = (float(abs(u[ia, ib])), float(abs(u[ib, ib])))
    ratio = u[ia, ia] * u[ib, ib] / (u[ia, ib] * u[ib, ia])
    relative_sign = float(np.real(ratio / abs(ratio)))
    symmetric = (u[:, ia] + u[:, ib]) / math.sqrt(2.0)
    return_weight = float(abs(symmetric[ia]) ** 2)

    pair = make_state(a, b, base.n_sites)
    out = permanent_oracle(u, pair)
    coincidence = float(abs(out.amplitudes[out.basis.index(a, b)]) ** 2)
    output_nity = noonity(correlation(out))

    half_sweep = time_at_phase(schedule, base, base.phi0 + math.pi)
    control = evolve_two_boson(base, schedule, disorder, pair, (0.0, half_sweep), config, n_records=2, target=pair)
    no_quench = control.trajectory[-1]

    ideal = 1.0 / math.sqrt(2.0)
    balanced = all(abs(x - ideal) <= BEAM_SPLITTER_AMPLITUDE_TOLERANCE for x in from_a + from_b)
    passed = (
        balanced
        and relative_sign < MAX_RELATIVE_SIGN
        and return_weight > MIN_RETURN_WEIGHT
        and output_nity > MIN_OUTPUT_NITY
        and no_quench.fidelity > MIN_NO_QUENCH_FIDELITY
    )
    logger.info(
        f"Beam splitter on ({a}, {b}): |amps| {from_a + from_b}, sign {relative_sign:.4f}, "
        f"Nity {output_nity:.4f}, passed={passed}"
    )
    return BeamSplitterReport(
        site_a=a,
        site_b=b,
        tau=tau,
        amplitudes_from_a=from_a,
        amplitudes_from_b=from_b,
        relative_sign=relative_sign,
        symmetric_return_weight=return_weight,
        coincidence=coincidence,
        output_nity=output_nity,
        no_quench_fidelity=float(no_quench.fidelity),
        no_quench_nity=float(no_quench.nity),
        balanced=balanced,
        passed=passed,
    )
