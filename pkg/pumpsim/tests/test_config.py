import math
from pathlib import Path

import pytest

from pumpsim.core.config import (
    Settings,
    config_sections,
    dump_run_config,
    load_run_config,
    merge_sections,
)
from pumpsim.core.constants import VALID_FORMATS
from pumpsim.core.exceptions import ConfigError
from pumpsim.schemas.experiment import ExperimentKind, ScanStage
from pumpsim.schemas.model import DisorderKind, ScheduleKind


def test_settings_reads_workers(monkeypatch):
    monkeypatch.setenv("PUMPSIM_WORKERS", "3")
    assert Settings().workers == 3


def test_formats_ignore_environment(monkeypatch):
    monkeypatch.setenv("PUMPSIM_FORMATS", "csv")
    config = load_run_config(command="hom")
    assert config.run.formats == list(VALID_FORMATS)


def test_fock_defaults():
    config = load_run_config(command="pump-fock")
    assert config.disorder.kind == DisorderKind.UNIFORM
    assert config.disorder.eta == 4.0
    assert config.initial.sites == (7, 7)
    assert config.schedule.kind == ScheduleKind.LINEAR
    assert config.schedule.rate == pytest.approx(0.08)
    assert config.run.samples == 100


def test_hom_defaults():
    spec = load_run_config(command="hom").to_experiment_spec()
    assert spec.kind == ExperimentKind.HOM
    assert spec.initial_sites == (9, 10)
    assert spec.disorder.eta == 0.5
    assert spec.quench_phi0 == pytest.approx(math.pi / 2)


def test_file_overrides_defaults():
    text = """
[run]
experiment = pump-fock
samples = 5
base_seed = 42

[disorder]
kind = normal
sigma = 3.0

[initial]
sites = 9, 9
"""
    spec = load_run_config(text=text).to_experiment_spec()
    assert spec.n_samples == 5
    assert spec.disorder.kind == DisorderKind.NORMAL
    assert spec.disorder.sigma == 3.0
    assert spec.disorder.base_seed == 42
    assert spec.initial_sites == (9, 9)


def test_flags_override_file():
    text = "[run]\nexperiment = pump-fock\nsamples = 5\n"
    config = load_run_config(text=text, overrides={"run": {"samples": 7, "records": None}})
    assert config.run.samples == 7


def test_config_from_file(tmp_path):
    path = tmp_path / "fock.ini"
    path.write_text("[run]\nexperiment = pump-fock\nsamples = 3\n")
    assert load_run_config(path).run.samples == 3


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.ini", command="pump-fock")


def test_unknown_section_rejected():
    with pytest.raises(ConfigError):
        load_run_config(text="[run]\nexperiment = hom\n[plots]\ndpi = 3\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        load_run_config(text="[run]\nexperiment = hom\n[model]\ngamma = 3\n")


def test_bad_value_rejected():
    with pytest.raises(ConfigError):
        load_run_config(command="hom", overrides={"run": {"formats": "csv,xml"}})


def test_experiment_mismatch_rejected():
    with pytest.raises(ConfigError):
        load_run_config(text="[run]\nexperiment = hom\n", command="pump-fock")


def test_experiment_required():
    with pytest.raises(ConfigError):
        load_run_config(text="[model]\nL = 9\n")


def test_hom_stage_scan_defaults():
    config = load_run_config(command="scan-disorder", overrides={"protocol": {"scan_stage": "hom"}})
    assert config.protocol.scan_stage == ScanStage.HOM
    assert config.schedule.kind == ScheduleKind.GAP_ADAPTIVE
    assert config.initial.sites == (9, 10)
    assert config.protocol.amplitudes == (0.0, 0.25, 0.5, 0.75, 1.0)


def test_dumped_config_reloads():
    config = load_run_config(command="full-protocol", overrides={"run": {"base_seed": 9}})
    reloaded = load_run_config(text=dump_run_config(config))
    assert reloaded == config
    assert config_sections(reloaded)["run"]["base_seed"] == "9"


def test_merge_skips_unset_values():
    merged = merge_sections({"run": {"samples": 3}}, {"run": {"samples": None, "records": 9}})
    assert merged == {"run": {"samples": 3, "records": 9}}


def test_checked_in_recipes_load():
    recipes = sorted((Path(__file__).resolve().parents[2] / "configs").glob("*.ini"))
    assert recipes
    for recipe in recipes:
        load_run_config(recipe).to_experiment_spec()
