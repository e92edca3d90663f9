from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from pumpsim.core.constants import (
    DEFAULT_BASE_SEED,
    DEFAULT_CHERN_GRID,
    DEFAULT_RECORDS_PER_STAGE,
    DEFAULT_SAMPLES,
    MIN_CHERN_GRID,
    QUENCH_PHI0,
    VALID_COMMANDS,
    VALID_FORMATS,
)
from pumpsim.schemas.evolution import PropagatorConfig
from pumpsim.schemas.model import (
    DisorderKind,
    DisorderSpec,
    PhaseSchedule,
    RiceMeleParams,
    ScheduleKind,
)


def split_list(value):
    """Accept comma-separated strings wherever a list is expected."""
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ExperimentKind(str, Enum):
    FOCK_PUMP = "fock_pump"
    DISORDER_SCAN = "disorder_scan"
    HOM = "hom"
    FULL_PROTOCOL = "full_protocol"
    SINGLE_PUMP = "single_pump"
    CHERN_CHECK = "chern_check"


class InitialStateKind(str, Enum):
    SITE = "site"
    WANNIER = "wannier"


class ScanStage(str, Enum):
    FOCK = "fock"
    HOM = "hom"


TWO_BOSON_KINDS = (
    ExperimentKind.FOCK_PUMP,
    ExperimentKind.DISORDER_SCAN,
    ExperimentKind.HOM,
    ExperimentKind.FULL_PROTOCOL,
)


class ExperimentSpec(BaseModel):
    """Everything one experiment run needs."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind
    params: RiceMeleParams = RiceMeleParams()
    schedule: PhaseSchedule
    disorder: DisorderSpec = DisorderSpec()
    propagator: PropagatorConfig = PropagatorConfig()
    n_samples: int = Field(DEFAULT_SAMPLES, ge=1)
    initial_sites: Tuple[int, ...] = ()
    initial_state: InitialStateKind = InitialStateKind.SITE
    sample_times: int = Field(DEFAULT_RECORDS_PER_STAGE, ge=2)
    n_cycles: int = Field(1, ge=1)
    quench_phi0: float = QUENCH_PHI0
    amplitudes: Tuple[float, ...] = ()
    scan_stage: ScanStage = ScanStage.FOCK
    chern_grid: Tuple[int, int] = (DEFAULT_CHERN_GRID, DEFAULT_CHERN_GRID)

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentSpec":
        n_sites = self.params.n_sites
        for site in self.initial_sites:
            if not 1 <= site <= n_sites:
                raise ValueError(f"initial site {site} outside 1..{n_sites}")
        if self.kind == ExperimentKind.SINGLE_PUMP and len(self.initial_sites) != 1:
            raise ValueError("a single-particle pump needs exactly one initial site")
        if self.kind in TWO_BOSON_KINDS and len(self.initial_sites) not in (1, 2):
            raise ValueError("two-boson experiments need one or two initial sites")
        if self.kind in (ExperimentKind.HOM, ExperimentKind.FULL_PROTOCOL):
            if self.schedule.kind != ScheduleKind.GAP_ADAPTIVE:
                raise ValueError(f"{self.kind.value} requires the gap-adaptive schedule")
            if len(self.initial_sites) != 2:
                raise ValueError(f"{self.kind.value} needs two initial sites")
        if any(a < 0 for a in self.amplitudes):
            raise ValueError("disorder amplitudes must be non-negative")
        if min(self.chern_grid) < MIN_CHERN_GRID:
            raise ValueError(f"Chern grid must be at least {MIN_CHERN_GRID} in each direction")
        return self

    @property
    def site_pair(self) -> Tuple[int, int]:
        """Initial two-boson sites; a single site means double occupancy."""
        if len(self.initial_sites) == 1:
            return self.initial_sites[0], self.initial_sites[0]
        return self.initial_sites[0], self.initial_sites[1]


class StageClock(BaseModel):
    model_config = ConfigDict(frozen=True)

    boundaries: Tuple[float, ...]
    tau: float
    period: float
    n_cycles: int


class EnsembleStats(BaseModel):
    """Per-time-point ensemble mean/std of each observable plus per-sample finals."""

    kind: ExperimentKind
    n_sites: int
    n_samples: int
    times: List[float]
    phases: List[float]
    mean_density: List[List[float]]
    std_density: List[List[float]]
    mean_com_shift: List[float]
    std_com_shift: List[float]
    mean_gamma_max: Optional[List[float]] = None
    std_gamma_max: Optional[List[float]] = None
    mean_nity: Optional[List[float]] = None
    std_nity: Optional[List[float]] = None
    mean_fidelity: Optional[List[float]] = None
    std_fidelity: Optional[List[float]] = None
    final_com_shift: List[float]
    final_fidelity: Optional[List[float]] = None
    final_nity: Optional[List[float]] = None
    seeds: List[int]
    snapshots: Dict[str, List[List[float]]] = Field(default_factory=dict)
    stage_clock: Optional[StageClock] = None


class DisorderScanRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    amplitude: float
    mean_fidelity: Optional[float] = None
    std_fidelity: Optional[float] = None
    mean_com_shift: Optional[float] = None
    std_com_shift: Optional[float] = None
    mean_nity: Optional[float] = None
    std_nity: Optional[float] = None

    @staticmethod
    def csv_header() -> List[str]:
        return [
            "amplitude",
            "mean_fidelity",
            "std_fidelity",
            "mean_com_shift",
            "std_com_shift",
            "mean_nity",
            "std_nity",
        ]

    def csv_values(self) -> List[Optional[float]]:
        return [
            self.amplitude,
            self.mean_fidelity,
            self.std_fidelity,
            self.mean_com_shift,
            self.std_com_shift,
            self.mean_nity,
            self.std_nity,
        ]


class BeamSplitterReport(BaseModel):
    """Single- and two-particle checks of the post-quench half sweep."""

    model_config = ConfigDict(frozen=True)

    site_a: int
    site_b: int
    tau: float
    amplitudes_from_a: Tuple[float, float]
    amplitudes_from_b: Tuple[float, float]
    relative_sign: float
    symmetric_return_weight: float
    coincidence: float
    output_nity: float
    no_quench_fidelity: float
    no_quench_nity: float
    balanced: bool
    passed: bool


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: str
    output_dir: str = "results"
    formats: List[str] = Field(default_factory=lambda: list(VALID_FORMATS))
    base_seed: int = Field(DEFAULT_BASE_SEED, ge=0)
    samples: int = Field(DEFAULT_SAMPLES, ge=1)
    records: int = Field(DEFAULT_RECORDS_PER_STAGE, ge=2)
    cycles: int = Field(1, ge=1)

    @field_validator("formats", mode="before")
    @classmethod
    def split_formats(cls, value):
        return split_list(value)

    @field_validator("formats")
    @classmethod
    def check_formats(cls, value: List[str]) -> List[str]:
        unknown = [fmt for fmt in value if fmt not in VALID_FORMATS]
        if unknown:
            raise ValueError(f"unknown output formats: {', '.join(unknown)}")
        return value

    @field_validator("experiment")
    @classmethod
    def check_experiment(cls, value: str) -> str:
        if value not in VALID_COMMANDS:
            raise ValueError(f"unknown experiment '{value}'")
        return value


class DisorderSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: DisorderKind = DisorderKind.NONE
    eta: float = Field(0.0, ge=0)
    mu: float = 0.0
    sigma: float = Field(0.0, ge=0)


class InitialSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sites: Tuple[int, ...] = ()
    state: InitialStateKind = InitialStateKind.SITE

    @field_validator("sites", mode="before")
    @classmethod
    def split_sites(cls, value):
        return split_list(value)


class ProtocolSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    quench_phi0: float = QUENCH_PHI0
    amplitudes: Tuple[float, ...] = ()
    scan_stage: ScanStage = ScanStage.FOCK

    @field_validator("amplitudes", mode="before")
    @classmethod
    def split_amplitudes(cls, value):
        return split_list(value)


class ChernSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_k: int = Field(DEFAULT_CHERN_GRID, ge=MIN_CHERN_GRID)
    n_t: int = Field(DEFAULT_CHERN_GRID, ge=MIN_CHERN_GRID)


class RunConfig(BaseModel):
    """Flat key-value run recipe, one section per concern."""

    model_config = ConfigDict(extra="forbid")

    run: RunSection
    model: RiceMeleParams = RiceMeleParams()
    schedule: PhaseSchedule
    disorder: DisorderSection = DisorderSection()
    propagator: PropagatorConfig = PropagatorConfig()
    initial: InitialSection = InitialSection()
    protocol: ProtocolSection = ProtocolSection()
    chern: ChernSection = ChernSection()

    def to_experiment_spec(self) -> ExperimentSpec:
        disorder = DisorderSpec(
            kind=self.disorder.kind,
            eta=self.disorder.eta,
            mu=self.disorder.mu,
            sigma=self.disorder.sigma,
            base_seed=self.run.base_seed,
        )
        return ExperimentSpec(
            kind=COMMAND_KINDS[self.run.experiment],
            params=self.model,
            schedule=self.schedule,
            disorder=disorder,
            propagator=self.propagator,
            n_samples=self.run.samples,
            initial_sites=self.initial.sites,
            initial_state=self.initial.state,
            sample_times=self.run.records,
            n_cycles=self.run.cycles,
            quench_phi0=self.protocol.quench_phi0,
            amplitudes=self.protocol.amplitudes,
            scan_stage=self.protocol.scan_stage,
            chern_grid=(self.chern.n_k, self.chern.n_t),
        )


COMMAND_KINDS: Dict[str, ExperimentKind] = {
    "chern": ExperimentKind.CHERN_CHECK,
    "pump-single": ExperimentKind.SINGLE_PUMP,
    "pump-fock": ExperimentKind.FOCK_PUMP,
    "scan-disorder": ExperimentKind.DISORDER_SCAN,
    "hom": ExperimentKind.HOM,
    "full-protocol": ExperimentKind.FULL_PROTOCOL,
}


class FileDigest(BaseModel):
    path: str
    sha256: str
    size: int


class RunManifest(BaseModel):
    command: str
    version: str
    config: Dict[str, Dict[str, str]]
    seeds: List[int]
    duration_seconds: float
    files: List[FileDigest]
