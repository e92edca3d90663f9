import json

import pytest

from pumpsim.core.exceptions import OutputError
from pumpsim.physics.protocol import mean_records
from pumpsim.schemas.experiment import (
    DisorderScanRow,
    EnsembleStats,
    ExperimentKind,
    FileDigest,
    RunManifest,
    StageClock,
)
from pumpsim.storage import plotting
from pumpsim.storage.repositories import ResultRepository, stats_header, verify_manifest


@pytest.fixture
def stats():
    return EnsembleStats(
        kind=ExperimentKind.FULL_PROTOCOL,
        n_sites=4,
        n_samples=2,
        times=[0.0, 1.0, 2.0],
        phases=[0.0, 0.5, 1.0],
        mean_density=[[2.0, 0, 0, 0], [1.0, 1.0, 0, 0], [0, 2.0, 0, 0]],
        std_density=[[0.0] * 4, [0.1] * 4, [0.0] * 4],
        mean_com_shift=[0.0, 0.25, 0.5],
        std_com_shift=[0.0, 0.01, 0.02],
        mean_gamma_max=[2.0, 1.0, 2.0],
        std_gamma_max=[0.0, 0.1, 0.0],
        mean_nity=[0.0, -1.0, 0.0],
        std_nity=[0.0, 0.1, 0.0],
        final_com_shift=[0.49, 0.51],
        final_nity=[0.0, 0.0],
        seeds=[1, 2],
        stage_clock=StageClock(boundaries=(0.0, 0.5, 1.5, 2.0), tau=1.0, period=0.5, n_cycles=1),
    )


def test_csv_uses_full_precision_and_lf(tmp_path):
    repo = ResultRepository(tmp_path)
    path = repo.write_csv("x.csv", ["a", "b"], [[0.1, None], [1 / 3, 2]])
    data = path.read_bytes()
    assert b"\r\n" not in data
    assert data.decode().splitlines() == ["a,b", "0.10000000000000001,", "0.33333333333333331,2"]


def test_stats_csv(tmp_path, stats):
    repo = ResultRepository(tmp_path)
    lines = repo.write_stats("trajectory.csv", stats).read_text().splitlines()
    assert lines[0].split(",") == stats_header(4)
    assert len(lines) == 4
    row = lines[2].split(",")
    assert float(row[2]) == 0.25
    assert row[stats_header(4).index("mean_fidelity")] == ""


def test_records_csv_columns(tmp_path, stats):
    repo = ResultRepository(tmp_path)
    lines = repo.write_records("records.csv", mean_records(stats), 4).read_text().splitlines()
    header = lines[0].split(",")
    assert header[:6] == ["t", "phi", "com", "gamma_max", "nity", "fidelity"]
    assert header[6:] == ["density_1", "density_2", "density_3", "density_4"]
    assert len(lines) == 4
    assert lines[2].split(",") == ["1", "0.5", "1.5", "1", "-1", "", "1", "1", "0", "0"]


def test_scan_csv(tmp_path):
    repo = ResultRepository(tmp_path)
    rows = [DisorderScanRow(amplitude=0.0, mean_fidelity=0.1, std_fidelity=0.0)]
    lines = repo.write_scan("scan.csv", rows).read_text().splitlines()
    assert lines[0].startswith("amplitude,mean_fidelity")
    assert lines[1].startswith("0,0.10000000000000001,0")


def test_json_of_model_and_dict(tmp_path, stats):
    repo = ResultRepository(tmp_path)
    payload = json.loads(repo.write_json("stats.json", stats).read_text())
    assert payload["kind"] == "full_protocol"
    assert json.loads(repo.write_json("plain.json", {"b": 1, "a": 2}).read_text()) == {"a": 2, "b": 1}


def test_svg_is_deterministic(tmp_path, stats):
    first = ResultRepository(tmp_path / "one")
    second = ResultRepository(tmp_path / "two")
    for repo in (first, second):
        repo.write_svg("density.svg", stats, plotting.HEATMAP)
        repo.write_svg("observables.svg", stats, plotting.LINES)
    for name in ("density.svg", "observables.svg"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_unknown_figure_kind(tmp_path, stats):
    with pytest.raises(OutputError):
        ResultRepository(tmp_path).write_svg("x.svg", stats, "pie")


def test_formats_filter(tmp_path):
    repo = ResultRepository(tmp_path, ["csv"])
    assert repo.wants("csv")
    assert not repo.wants("svg")


def test_manifest_tracks_and_verifies(tmp_path):
    repo = ResultRepository(tmp_path)
    repo.write_csv("a.csv", ["x"], [[1.0]])
    repo.write_json("b.json", {"y": 2})
    files = repo.digests()
    assert [f.path for f in files] == ["a.csv", "b.json"]
    repo.write_manifest(
        RunManifest(command="hom", version="1.0.0", config={}, seeds=[1], duration_seconds=0.1, files=files)
    )
    assert verify_manifest(tmp_path) == []
    (tmp_path / "a.csv").write_text("x\n2\n")
    assert verify_manifest(tmp_path) == ["a.csv"]


def test_digest_records_size(tmp_path):
    repo = ResultRepository(tmp_path)
    path = repo.write_csv("a.csv", ["x"], [])
    assert repo.digests() == [
        FileDigest(path="a.csv", sha256=repo.digests()[0].sha256, size=path.stat().st_size)
    ]


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OutputError):
        ResultRepository(blocker / "sub")
