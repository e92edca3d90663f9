"""Command-line entry point."""
import argparse
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, TextIO

from pydantic import ValidationError as PydanticValidationError

from pumpsim import __version__
from pumpsim.core.config import config_sections, load_run_config, settings
from pumpsim.core.constants import (
    CMD_CHERN,
    CMD_FULL_PROTOCOL,
    CMD_HOM,
    CMD_PUMP_FOCK,
    CMD_PUMP_SINGLE,
    CMD_SCAN_DISORDER,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    VALID_FORMATS,
)
from pumpsim.core.exceptions import BaseSimulationError
from pumpsim.core.logging_config import get_logger, setup_logging
from pumpsim.physics.model import sample_seed
from pumpsim.physics.protocol import (
    beam_splitter_check,
    mean_records,
    run_chern_check,
    run_disorder_scan,
    run_fock_pump,
    run_full_protocol,
    run_hom,
    run_single_pump,
)
from pumpsim.schemas.evolution import PropagatorMethod
from pumpsim.schemas.experiment import EnsembleStats, ExperimentSpec, RunConfig, RunManifest
from pumpsim.schemas.model import DisorderKind
from pumpsim.storage import plotting
from pumpsim.storage.repositories import ResultRepository

logger = get_logger(__name__)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--output-dir", help="Directory for result files")
    common.add_argument("--formats", help=f"Comma-separated subset of {','.join(VALID_FORMATS)}")
    common.add_argument("--seed", type=int, help="Base seed of the disorder ensemble")
    common.add_argument("--samples", type=int, help="Number of disorder samples")
    common.add_argument("--workers", type=int, help="Worker processes (default: all cores)")
    common.add_argument("--records", type=int, help="Recorded time points per stage")
    common.add_argument("--steps", type=int, help="Propagation steps per pump cycle")
    common.add_argument("--method", choices=[m.value for m in PropagatorMethod])
    common.add_argument("--cycles", type=int, help="Pump cycles per transport stage")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return common


def _add_disorder_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=[k.value for k in DisorderKind], help="Disorder distribution")
    parser.add_argument("--eta", type=float, help="Uniform disorder amplitude")
    parser.add_argument("--sigma", type=float, help="Normal disorder width")
    parser.add_argument("--mu", type=float, help="Normal disorder mean")


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="pumpsim",
        description="Disordered Thouless pumping of one and two bosons on a Rice-Mele chain",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    chern = sub.add_parser(CMD_CHERN, parents=[common], help="Chern numbers and band structure")
    chern.add_argument("--nk", type=int, help="Grid points along k")
    chern.add_argument("--nt", type=int, help="Grid points along phi")

    single = sub.add_parser(CMD_PUMP_SINGLE, parents=[common], help="Single-particle pump")
    single.add_argument("--start", type=int, help="Initial site (1-based)")
    single.add_argument("--omega", type=float, help="Linear pump frequency")
    single.add_argument("--wannier", action="store_true", help="Start from a Wannier state")
    _add_disorder_flags(single)

    fock = sub.add_parser(CMD_PUMP_FOCK, parents=[common], help="Two-boson Fock-state pump")
    fock.add_argument("--start", type=int, help="Doubly occupied initial site (1-based)")
    fock.add_argument("--omega", type=float, help="Linear pump frequency")
    _add_disorder_flags(fock)

    scan = sub.add_parser(CMD_SCAN_DISORDER, parents=[common], help="Disorder-amplitude scan")
    scan.add_argument("--stage", choices=["fock", "hom"], help="Experiment scanned")
    scan.add_argument("--amplitudes", help="Comma-separated disorder amplitudes")
    scan.add_argument("--kind", choices=[k.value for k in DisorderKind], help="Disorder distribution")
    scan.add_argument("--mu", type=float, help="Normal disorder mean")
    scan.add_argument("--start", type=int, help="Doubly occupied initial site (fock stage)")

    hom = sub.add_parser(CMD_HOM, parents=[common], help="Quench-assisted HOM interference")
    hom.add_argument("--epsilon", type=float, help="Gap-adaptive rate")
    _add_disorder_flags(hom)

    full = sub.add_parser(CMD_FULL_PROTOCOL, parents=[common], help="Three-stage entanglement distribution")
    full.add_argument("--epsilon", type=float, help="Gap-adaptive rate")
    _add_disorder_flags(full)
    return parser


def flag_overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    """CLI flags as config sections; unset flags are left out."""
    get = lambda name: getattr(args, name, None)  # noqa: E731
    overrides: Dict[str, Dict[str, Any]] = {
        "run": {
            "output_dir": get("output_dir"),
            "formats": get("formats"),
            "base_seed": get("seed"),
            "samples": get("samples"),
            "records": get("records"),
            "cycles": get("cycles"),
        },
        "propagator": {"steps_per_cycle": get("steps"), "method": get("method")},
        "schedule": {"rate": get("omega") if get("omega") is not None else get("epsilon")},
        "chern": {"n_k": get("nk"), "n_t": get("nt")},
        "protocol": {"amplitudes": get("amplitudes"), "scan_stage": get("stage")},
    }

    disorder = {"kind": get("kind"), "eta": get("eta"), "sigma": get("sigma"), "mu": get("mu")}
    if disorder["kind"] is None:
        if get("sigma") is not None:
            disorder["kind"] = DisorderKind.NORMAL.value
        elif get("eta") is not None:
            disorder["kind"] = DisorderKind.UNIFORM.value
    overrides["disorder"] = disorder

    initial: Dict[str, Any] = {}
    start = get("start")
    if start is not None:
        initial["sites"] = (start,) if args.command == CMD_PUMP_SINGLE else (start, start)
    if get("wannier"):
        initial["state"] = "wannier"
    overrides["initial"] = initial
    return overrides


def _write_ensemble(repo: ResultRepository, stats: EnsembleStats) -> None:
    if repo.wants("csv"):
        repo.write_stats("trajectory.csv", stats)
        repo.write_records("records.csv", mean_records(stats), stats.n_sites)
    if repo.wants("json"):
        repo.write_json("stats.json", stats)
    if repo.wants("svg"):
        repo.write_svg("density.svg", stats, plotting.HEATMAP)
        repo.write_svg("observables.svg", stats, plotting.LINES)


def _summary(out: TextIO, stats: EnsembleStats) -> None:
    def last(values):
        return "n/a" if values is None else f"{values[-1]:.6f}"

    out.write(
        f"samples={stats.n_samples} com_shift={stats.mean_com_shift[-1]:.6f} "
        f"gamma_max={last(stats.mean_gamma_max)} nity={last(stats.mean_nity)} "
        f"fidelity={last(stats.mean_fidelity)}\n"
    )


def cmd_chern(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    result, bands = run_chern_check(spec)
    out.write(f"nu1={result.nu1:+d} nu2={result.nu2:+d}\n")
    out.write(
        f"grid={result.grid[0]}x{result.grid[1]} raw=({result.raw[0]:.9f}, {result.raw[1]:.9f}) "
        f"curvature=({result.curvature_integral[0]:.6f}, {result.curvature_integral[1]:.6f})\n"
    )
    if repo.wants("json"):
        repo.write_json("chern.json", result)
    if repo.wants("csv"):
        repo.write_bands("bands.csv", bands)
        repo.write_csv("gap.csv", ["phi", "gap"], zip(bands.phi.tolist(), bands.gap.tolist()))
    if repo.wants("svg"):
        repo.write_figure("gap.svg", plotting.plot_gap, bands)
    return []


def cmd_single(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    stats = run_single_pump(spec, workers)
    _write_ensemble(repo, stats)
    _summary(out, stats)
    return stats.seeds


def cmd_fock(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    stats = run_fock_pump(spec, workers)
    _write_ensemble(repo, stats)
    _summary(out, stats)
    return stats.seeds


def cmd_scan(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    rows = run_disorder_scan(spec, workers=workers)
    if repo.wants("csv"):
        repo.write_scan("scan.csv", rows)
    if repo.wants("json"):
        repo.write_json("scan.json", {"stage": spec.scan_stage.value, "rows": [r.model_dump() for r in rows]})
    if repo.wants("svg"):
        label = "sigma" if spec.disorder.kind == DisorderKind.NORMAL else "eta"
        repo.write_figure("scan.svg", plotting.plot_scan, rows, label)
    for row in rows:
        out.write(" ".join(f"{k}={'n/a' if v is None else f'{v:.6f}'}" for k, v in row.model_dump().items()) + "\n")
    return _ensemble_seeds(spec)


def cmd_hom(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    stats = run_hom(spec, workers)
    _write_ensemble(repo, stats)
    report = beam_splitter_check(
        spec.params,
        spec.schedule,
        sites=spec.site_pair,
        config=spec.propagator,
        quench_phi0=spec.quench_phi0,
    )
    if repo.wants("json"):
        repo.write_json("beam_splitter.json", report)
    _summary(out, stats)
    out.write(f"beam_splitter passed={report.passed}\n")
    return stats.seeds


def cmd_full(spec: ExperimentSpec, repo: ResultRepository, workers: int, out: TextIO) -> List[int]:
    stats = run_full_protocol(spec, workers)
    _write_ensemble(repo, stats)
    _summary(out, stats)
    return stats.seeds


def _ensemble_seeds(spec: ExperimentSpec) -> List[int]:
    return [sample_seed(spec.disorder, i) for i in range(spec.n_samples)]


COMMANDS: Dict[str, Callable[[ExperimentSpec, ResultRepository, int, TextIO], List[int]]] = {
    CMD_CHERN: cmd_chern,
    CMD_PUMP_SINGLE: cmd_single,
    CMD_PUMP_FOCK: cmd_fock,
    CMD_SCAN_DISORDER: cmd_scan,
    CMD_HOM: cmd_hom,
    CMD_FULL_PROTOCOL: cmd_full,
}


def run(config: RunConfig, workers: int, out: TextIO) -> ResultRepository:
    """Run one configured experiment and write its files, manifest last."""
    started = time.perf_counter()
    spec = config.to_experiment_spec()
    logger.info(f"{settings.app_name} {__version__}: {config.run.experiment} -> {config.run.output_dir}")
    repo = ResultRepository(Path(config.run.output_dir), config.run.formats)
    seeds = COMMANDS[config.run.experiment](spec, repo, workers, out)
    manifest = RunManifest(
        command=config.run.experiment,
        version=__version__,
        config=config_sections(config),
        seeds=seeds,
        duration_seconds=round(time.perf_counter() - started, 3),
        files=repo.digests(),
    )
    repo.write_manifest(manifest)
    logger.info(f"Wrote {len(manifest.files)} files to {repo.output_dir}")
    return repo


def main(argv: Optional[List[str]] = None, out: TextIO = sys.stdout) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(verbose=True if args.verbose else None)

    try:
        config = load_run_config(args.config, command=args.command, overrides=flag_overrides(args))
        run(config, args.workers or settings.workers, out)
    except PydanticValidationError as exc:
        sys.stderr.write(f"error: invalid configuration: {exc}\n")
        return EXIT_CONFIG_ERROR
    except BaseSimulationError as exc:
        sys.stderr.write(f"error: {exc.detail}\n")
        if exc.exit_code == EXIT_CONFIG_ERROR:
            parser.print_usage(sys.stderr)
        return exc.exit_code
    except Exception:
        logger.exception("Unhandled error")
        return EXIT_NUMERICAL_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
