"""Repository layer for result files."""
import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from pydantic import BaseModel

from pumpsim.core.constants import CSV_FLOAT_FORMAT, MANIFEST_FILENAME, VALID_FORMATS
from pumpsim.core.exceptions import OutputError
from pumpsim.core.logging_config import get_logger
from pumpsim.schemas.bloch import BandStructure
from pumpsim.schemas.experiment import DisorderScanRow, EnsembleStats, FileDigest, RunManifest
from pumpsim.schemas.fock import ObservableRecord
from pumpsim.storage import plotting

logger = get_logger(__name__)


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, CSV_FLOAT_FORMAT)
    return str(value)


def stats_header(n_sites: int) -> List[str]:
    header = ["t", "phi"]
    for name in ("com_shift", "gamma_max", "nity", "fidelity"):
        header += [f"mean_{name}", f"std_{name}"]
    header += [f"mean_density_{j}" for j in range(1, n_sites + 1)]
    header += [f"std_density_{j}" for j in range(1, n_sites + 1)]
    return header


def stats_rows(stats: EnsembleStats) -> List[list]:
    rows = []
    for i, t in enumerate(stats.times):
        row = [t, stats.phases[i]]
        for name in ("com_shift", "gamma_max", "nity", "fidelity"):
            mean = getattr(stats, f"mean_{name}")
            std = getattr(stats, f"std_{name}")
            row += [None if mean is None else mean[i], None if std is None else std[i]]
        row += list(stats.mean_density[i]) + list(stats.std_density[i])
        rows.append(row)
    return rows


class ResultRepository:
    """Writes one run's files into an output directory and tracks them for the manifest."""

    def __init__(self, output_dir: Path, formats: Optional[Sequence[str]] = None):
        """Initialize repository with an output directory.

        Args:
            output_dir: Directory receiving every file of the run
            formats: Subset of csv, json, svg to emit; the manifest is always written
        """
        self.output_dir = Path(output_dir)
        self.formats = set(formats if formats is not None else VALID_FORMATS)
        self.written: List[Path] = []
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory: {exc.strerror}", path=str(output_dir)) from exc

    def wants(self, fmt: str) -> bool:
        return fmt in self.formats

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _track(self, path: Path) -> Path:
        if path not in self.written:
            self.written.append(path)
        logger.debug(f"Wrote {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        """Write a header plus rows with 17 significant digits and LF line endings.

        Raises:
            OutputError: If the file cannot be written
        """
        path = self._path(name)
        try:
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow([format_cell(value) for value in row])
        except OSError as exc:
            raise OutputError(exc.strerror or "write failed", path=str(path)) from exc
        return self._track(path)

    def write_records(self, name: str, records: Sequence[ObservableRecord], n_sites: int) -> Path:
        return self.write_csv(name, ObservableRecord.csv_header(n_sites), (r.csv_values() for r in records))

    def write_stats(self, name: str, stats: EnsembleStats) -> Path:
        return self.write_csv(name, stats_header(stats.n_sites), stats_rows(stats))

    def write_scan(self, name: str, rows: Sequence[DisorderScanRow]) -> Path:
        return self.write_csv(name, DisorderScanRow.csv_header(), (row.csv_values() for row in rows))

    def write_bands(self, name: str, bands: BandStructure) -> Path:
        rows = []
        for i, phi in enumerate(bands.phi):
            for j, k in enumerate(bands.k):
                rows.append([float(phi), float(k), float(bands.lower[i, j]), float(bands.upper[i, j])])
        return self.write_csv(name, ["phi", "k", "E1", "E2"], rows)

    def write_json(self, name: str, payload) -> Path:
        path = self._path(name)
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2, sort_keys=True)
        try:
            path.write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise OutputError(exc.strerror or "write failed", path=str(path)) from exc
        return self._track(path)

    def write_svg(self, name: str, stats: EnsembleStats, kind: str) -> Path:
        """Density heatmap or observable line plot of an ensemble."""
        path = self._path(name)
        try:
            if kind == plotting.HEATMAP:
                plotting.plot_density_heatmap(stats, path)
            elif kind == plotting.LINES:
                plotting.plot_observables(stats, path)
            else:
                raise OutputError(f"unknown figure kind '{kind}'", path=str(path))
        except OSError as exc:
            raise OutputError(exc.strerror or "write failed", path=str(path)) from exc
        return self._track(path)

    def write_figure(self, name: str, draw, *args) -> Path:
        path = self._path(name)
        try:
            draw(*args, path)
        except OSError as exc:
            raise OutputError(exc.strerror or "write failed", path=str(path)) from exc
        return self._track(path)

    def digests(self) -> List[FileDigest]:
        result = []
        for path in self.written:
            data = path.read_bytes()
            result.append(
                FileDigest(
                    path=path.name,
                    sha256=hashlib.sha256(data).hexdigest(),
                    size=len(data),
                )
            )
        return result

    def write_manifest(self, manifest: RunManifest) -> Path:
        """Written last; lists every file emitted before it."""
        return self.write_json(MANIFEST_FILENAME, manifest)


def verify_manifest(output_dir: Path) -> List[str]:
    """Names of files whose digest no longer matches the manifest."""
    output_dir = Path(output_dir)
    manifest = RunManifest.model_validate_json((output_dir / MANIFEST_FILENAME).read_text(encoding="utf-8"))
    mismatched = []
    for entry in manifest.files:
        path = output_dir / entry.path
        if not path.exists() or hashlib.sha256(path.read_bytes()).hexdigest() != entry.sha256:
            mismatched.append(entry.path)
    return mismatched
