"""Application and run configuration."""
import configparser
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import Field, ValidationError as PydanticValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from pumpsim.core.constants import (
    CMD_CHERN,
    CMD_FULL_PROTOCOL,
    CMD_HOM,
    CMD_PUMP_FOCK,
    CMD_PUMP_SINGLE,
    CMD_SCAN_DISORDER,
    DEFAULT_EPSILON,
    DEFAULT_HOM_SCAN_AMPLITUDES,
    DEFAULT_OMEGA,
    DEFAULT_SCAN_AMPLITUDES,
    FOCK_PUMP_ETA,
    FOCK_START_SITE,
    FULL_PROTOCOL_SITES,
    HOM_ETA,
    HOM_INPUT_SITES,
    QUENCH_PHI0,
)
from pumpsim.core.exceptions import ConfigError
from pumpsim.schemas.experiment import RunConfig


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="PUMPSIM_",
        env_file=os.getenv("ENV_FILE", ".env"),
        extra="ignore",
    )

    app_name: str = "pumpsim"
    debug: bool = False
    output_dir: Optional[str] = None
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)


settings = Settings()


# Default physics per subcommand; a config file and CLI flags override these.
COMMAND_DEFAULTS: Dict[str, Dict[str, Dict[str, Any]]] = {
    CMD_CHERN: {
        "schedule": {"kind": "linear", "rate": DEFAULT_OMEGA},
        "run": {"samples": 1},
    },
    CMD_PUMP_SINGLE: {
        "schedule": {"kind": "linear", "rate": DEFAULT_OMEGA},
        "run": {"samples": 1},
        "initial": {"sites": (FOCK_START_SITE,)},
    },
    CMD_PUMP_FOCK: {
        "schedule": {"kind": "linear", "rate": DEFAULT_OMEGA},
        "disorder": {"kind": "uniform", "eta": FOCK_PUMP_ETA},
        "initial": {"sites": (FOCK_START_SITE, FOCK_START_SITE)},
    },
    CMD_SCAN_DISORDER: {
        "schedule": {"kind": "linear", "rate": DEFAULT_OMEGA},
        "disorder": {"kind": "uniform"},
        "initial": {"sites": (FOCK_START_SITE, FOCK_START_SITE)},
        "protocol": {"amplitudes": DEFAULT_SCAN_AMPLITUDES},
    },
    CMD_HOM: {
        "schedule": {"kind": "gap_adaptive", "rate": DEFAULT_EPSILON},
        "disorder": {"kind": "uniform", "eta": HOM_ETA},
        "initial": {"sites": HOM_INPUT_SITES},
        "protocol": {"quench_phi0": QUENCH_PHI0},
    },
    CMD_FULL_PROTOCOL: {
        "schedule": {"kind": "gap_adaptive", "rate": DEFAULT_EPSILON},
        "disorder": {"kind": "uniform", "eta": HOM_ETA},
        "initial": {"sites": FULL_PROTOCOL_SITES},
        "protocol": {"quench_phi0": QUENCH_PHI0},
    },
}


def default_sections(command: str, stage: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """Section dictionaries holding the defaults of one subcommand.

    A disorder scan of the interference stage starts from the hom
    defaults.
    """
    if command not in COMMAND_DEFAULTS:
        raise ConfigError(f"unknown experiment '{command}'")
    sections: Dict[str, Dict[str, Any]] = {"run": {"experiment": command}}
    for name, values in COMMAND_DEFAULTS[command].items():
        sections.setdefault(name, {}).update(values)
    if command == CMD_SCAN_DISORDER and stage == "hom":
        for name, values in COMMAND_DEFAULTS[CMD_HOM].items():
            sections.setdefault(name, {}).update(values)
        sections["protocol"].update(
            {"amplitudes": DEFAULT_HOM_SCAN_AMPLITUDES, "scan_stage": "hom"}
        )
    return sections


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    return parser


def read_sections(text: str, source: Optional[str] = None) -> Dict[str, Dict[str, str]]:
    """Parse INI text into raw string sections; unknown sections are rejected."""
    parser = _parser()
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(str(exc), source=source) from exc
    known = set(RunConfig.model_fields)
    sections: Dict[str, Dict[str, str]] = {}
    for name in parser.sections():
        if name not in known:
            raise ConfigError(f"unknown section [{name}]", source=source)
        sections[name] = dict(parser.items(name))
    return sections


def merge_sections(*layers: Dict[str, Dict[str, Any]]) -> Dict[str, Dict[str, Any]]:
    """Later layers override earlier ones key by key."""
    merged: Dict[str, Dict[str, Any]] = {}
    for layer in layers:
        for name, values in layer.items():
            merged.setdefault(name, {}).update(
                {key: value for key, value in values.items() if value is not None}
            )
    return merged


def build_run_config(
    sections: Dict[str, Dict[str, Any]], source: Optional[str] = None
) -> RunConfig:
    try:
        return RunConfig.model_validate(sections)
    except PydanticValidationError as exc:
        raise ConfigError(_format_errors(exc), source=source) from exc


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    text: Optional[str] = None,
    command: Optional[str] = None,
    overrides: Optional[Dict[str, Dict[str, Any]]] = None,
) -> RunConfig:
    """Load a run configuration.

    Args:
        path: INI file to read
        text: INI text, used instead of ``path``
        command: Subcommand whose defaults fill omitted keys
        overrides: Highest-precedence values (CLI flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: If the file is unreadable, malformed or has unknown keys
    """
    source = str(path) if path is not None else None
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", source=source) from exc
    file_sections = read_sections(text, source=source) if text else {}

    experiment = command or file_sections.get("run", {}).get("experiment")
    if experiment is None:
        raise ConfigError("no experiment given", source=source)
    file_experiment = file_sections.get("run", {}).get("experiment")
    if command and file_experiment and file_experiment != command:
        raise ConfigError(
            f"config is for '{file_experiment}', not '{command}'", source=source
        )

    env_layer: Dict[str, Dict[str, Any]] = {}
    if settings.output_dir:
        env_layer = {"run": {"output_dir": settings.output_dir}}
    overrides = overrides or {}
    stage = overrides.get("protocol", {}).get("scan_stage") or file_sections.get(
        "protocol", {}
    ).get("scan_stage")
    sections = merge_sections(
        default_sections(experiment, stage), file_sections, env_layer, overrides
    )
    return build_run_config(sections, source=source)


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_format_value(item) for item in value)
    if hasattr(value, "value"):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_sections(config: RunConfig) -> Dict[str, Dict[str, str]]:
    """Flat string form of a RunConfig, as written to INI files and manifests."""
    sections: Dict[str, Dict[str, str]] = {}
    for name in RunConfig.model_fields:
        values = getattr(config, name).model_dump()
        sections[name] = {
            key: _format_value(value) for key, value in values.items() if value is not None
        }
    return sections


def dump_run_config(config: RunConfig) -> str:
    parser = _parser()
    for name, values in config_sections(config).items():
        parser[name] = values
    lines: List[str] = []
    for name in parser.sections():
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {value}" for key, value in parser.items(name))
        lines.append("")
    return "\n".join(lines)


def _format_errors(exc: PydanticValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error["loc"])
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)
