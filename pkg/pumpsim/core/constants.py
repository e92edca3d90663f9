"""Application-wide constants."""
import math
from typing import Final

# Model defaults (energies in units of J, times in units of 1/J, hbar = 1)
DEFAULT_J: Final[float] = 1.0
DEFAULT_DELTA0: Final[float] = 1.0
DEFAULT_OFFSET0: Final[float] = 20.0
DEFAULT_CELLS: Final[int] = 9
DEFAULT_PHI0: Final[float] = 0.0
UNIT_CELL_LENGTH: Final[int] = 2
MIN_CELLS: Final[int] = 2

# Schedules
DEFAULT_OMEGA: Final[float] = 0.08
DEFAULT_EPSILON: Final[float] = 0.03
ODE_STEPS_PER_CYCLE: Final[int] = 10_000
GAP_SCAN_POINTS: Final[int] = 512
QUENCH_PHI0: Final[float] = math.pi / 2

# Band structure
GAP_GRID_POINTS: Final[int] = 2048
DEFAULT_CHERN_GRID: Final[int] = 101
MIN_CHERN_GRID: Final[int] = 16
CHERN_INTEGER_TOLERANCE: Final[float] = 0.01

# Propagation
DEFAULT_STEPS_PER_CYCLE: Final[int] = 20_000
MIN_STEPS_PER_CYCLE: Final[int] = 1_000
DEFAULT_NORM_TOLERANCE: Final[float] = 1e-8
STATE_NORM_GUARD: Final[float] = 1e-6
DEFAULT_RECORDS_PER_STAGE: Final[int] = 400
UNITARITY_TOLERANCE: Final[float] = 1e-8

# Disorder presets
DEFAULT_SAMPLES: Final[int] = 100
DEFAULT_BASE_SEED: Final[int] = 20200101
FOCK_PUMP_ETA: Final[float] = 4.0
HOM_ETA: Final[float] = 0.5
DEFAULT_SCAN_AMPLITUDES: Final[tuple[float, ...]] = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0)
DEFAULT_HOM_SCAN_AMPLITUDES: Final[tuple[float, ...]] = (0.0, 0.25, 0.5, 0.75, 1.0)

# Initial sites (1-based)
FOCK_START_SITE: Final[int] = 7
HOM_INPUT_SITES: Final[tuple[int, int]] = (9, 10)
FULL_PROTOCOL_SITES: Final[tuple[int, int]] = (7, 12)

# Beam-splitter acceptance
BEAM_SPLITTER_AMPLITUDE_TOLERANCE: Final[float] = 0.02

# Output
CSV_FLOAT_FORMAT: Final[str] = ".17g"
SVG_HASH_SALT: Final[str] = "pumpsim"
VALID_FORMATS: Final[tuple[str, ...]] = ("csv", "json", "svg")
MANIFEST_FILENAME: Final[str] = "manifest.json"

# Subcommands
CMD_CHERN: Final[str] = "chern"
CMD_PUMP_SINGLE: Final[str] = "pump-single"
CMD_PUMP_FOCK: Final[str] = "pump-fock"
CMD_SCAN_DISORDER: Final[str] = "scan-disorder"
CMD_HOM: Final[str] = "hom"
CMD_FULL_PROTOCOL: Final[str] = "full-protocol"

VALID_COMMANDS: Final[tuple[str, ...]] = (
    CMD_CHERN,
    CMD_PUMP_SINGLE,
    CMD_PUMP_FOCK,
    CMD_SCAN_DISORDER,
    CMD_HOM,
    CMD_FULL_PROTOCOL,
)

# Exit codes
EXIT_OK: Final[int] = 0
EXIT_CONFIG_ERROR: Final[int] = 2
EXIT_NUMERICAL_ERROR: Final[int] = 3

# Error codes
ERROR_CODE_VALIDATION_ERROR: Final[str] = "validation_error"
ERROR_CODE_CONFIG_ERROR: Final[str] = "config_error"
ERROR_CODE_DIMENSION_MISMATCH: Final[str] = "dimension_mismatch"
ERROR_CODE_BASIS_MISMATCH: Final[str] = "basis_mismatch"
ERROR_CODE_NUMERICAL_ERROR: Final[str] = "numerical_error"
ERROR_CODE_INTEGRATION_FAILURE: Final[str] = "integration_failure"
ERROR_CODE_GRID_TOO_COARSE: Final[str] = "grid_too_coarse"
ERROR_CODE_NON_UNITARY: Final[str] = "non_unitary"
ERROR_CODE_SAMPLE_FAILURE: Final[str] = "sample_failure"
ERROR_CODE_OUTPUT_ERROR: Final[str] = "output_error"
