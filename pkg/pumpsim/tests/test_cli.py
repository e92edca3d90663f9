import io
import json

import pytest

from pumpsim.main import build_parser, flag_overrides, main
from pumpsim.storage.repositories import verify_manifest

FAST = ["--samples", "1", "--steps", "1000", "--records", "3", "--workers", "1"]


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_chern_command(tmp_path):
    code, out = run_cli("chern", "--output-dir", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "nu1=-1 nu2=+1"
    assert out.splitlines()[1].startswith("grid=101x101")
    for name in ("bands.csv", "chern.json", "gap.svg", "manifest.json"):
        assert (tmp_path / name).exists()
    assert json.loads((tmp_path / "chern.json").read_text())["nu2"] == 1


def test_pump_single_writes_manifest_last(tmp_path):
    code, _ = run_cli("pump-single", "--output-dir", str(tmp_path), "--formats", "csv,json", *FAST)
    assert code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "pump-single"
    assert [f["path"] for f in manifest["files"]] == ["trajectory.csv", "records.csv", "stats.json"]
    assert manifest["config"]["run"]["samples"] == "1"
    assert len(manifest["seeds"]) == 1
    assert not (tmp_path / "density.svg").exists()
    assert verify_manifest(tmp_path) == []
    header = (tmp_path / "records.csv").read_text().splitlines()[0]
    assert header.startswith("t,phi,com,gamma_max,nity,fidelity,density_1,")


def test_hom_csv_only_skips_json(tmp_path):
    code, out = run_cli("hom", "--output-dir", str(tmp_path), "--formats", "csv", *FAST)
    assert code == 0
    assert "beam_splitter passed=" in out
    assert not (tmp_path / "beam_splitter.json").exists()
    assert not (tmp_path / "stats.json").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [f["path"] for f in manifest["files"]] == ["trajectory.csv", "records.csv"]


def test_same_seed_same_bytes(tmp_path):
    args = ["pump-fock", "--formats", "csv", "--eta", "2", "--seed", "5", *FAST]
    assert run_cli(*args, "--output-dir", str(tmp_path / "a"))[0] == 0
    assert run_cli(*args, "--output-dir", str(tmp_path / "b"))[0] == 0
    first = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert first == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_scan_command(tmp_path):
    code, out = run_cli(
        "scan-disorder", "--output-dir", str(tmp_path), "--amplitudes", "0,1", "--formats", "csv", *FAST
    )
    assert code == 0
    assert len((tmp_path / "scan.csv").read_text().splitlines()) == 3
    assert out.count("amplitude=") == 2


def test_config_file_drives_command(tmp_path):
    config = tmp_path / "run.ini"
    config.write_text(f"[run]\nexperiment = pump-fock\noutput_dir = {tmp_path / 'out'}\nformats = json\n")
    code, _ = run_cli("pump-fock", "--config", str(config), *FAST)
    assert code == 0
    assert (tmp_path / "out" / "stats.json").exists()


def test_bad_format_exits_2(tmp_path):
    code, _ = run_cli("chern", "--output-dir", str(tmp_path), "--formats", "xml")
    assert code == 2


def test_invalid_site_exits_2(tmp_path):
    code, _ = run_cli("pump-fock", "--output-dir", str(tmp_path), "--start", "40", *FAST)
    assert code == 2


def test_coarse_chern_grid_exits_2(tmp_path):
    code, _ = run_cli("chern", "--output-dir", str(tmp_path), "--nk", "4")
    assert code == 2


def test_numerical_failure_exits_3(tmp_path):
    code, _ = run_cli("pump-single", "--output-dir", str(tmp_path), "--method", "rk4", *FAST)
    assert code == 3


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["teleport"])
    assert exc.value.code == 2


def test_eta_implies_uniform():
    args = build_parser().parse_args(["hom", "--eta", "0.7"])
    overrides = flag_overrides(args)
    assert overrides["disorder"]["kind"] == "uniform"
    assert overrides["disorder"]["eta"] == 0.7


def test_sigma_implies_normal():
    args = build_parser().parse_args(["pump-fock", "--sigma", "3", "--start", "9"])
    overrides = flag_overrides(args)
    assert overrides["disorder"]["kind"] == "normal"
    assert overrides["initial"]["sites"] == (9, 9)


def test_start_single_site():
    args = build_parser().parse_args(["pump-single", "--start", "8", "--wannier"])
    assert flag_overrides(args)["initial"] == {"sites": (8,), "state": "wannier"}
