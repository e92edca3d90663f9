"""Deterministic SVG figures of ensemble results."""
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from pumpsim.core.constants import SVG_HASH_SALT  # noqa: E402
from pumpsim.schemas.bloch import BandStructure  # noqa: E402
from pumpsim.schemas.experiment import DisorderScanRow, EnsembleStats  # noqa: E402

HEATMAP = "heatmap"
LINES = "lines"


def _save(fig, path: Path) -> None:
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_density_heatmap(stats: EnsembleStats, path: Path) -> None:
    """Mean density over site x time."""
    density = np.array(stats.mean_density)
    times = np.array(stats.times)
    fig, ax = plt.subplots(figsize=(6, 4))
    extent = (0.5, stats.n_sites + 0.5, times[0], times[-1] if times[-1] > times[0] else times[0] + 1)
    image = ax.imshow(density, aspect="auto", origin="lower", extent=extent, cmap="viridis")
    fig.colorbar(image, ax=ax, label=r"$\langle n_j \rangle$")
    ax.set_xlabel("site j")
    ax.set_ylabel("t (1/J)")
    ax.set_title(f"{stats.kind.value}: density ({stats.n_samples} samples)")
    _save(fig, path)


def plot_observables(stats: EnsembleStats, path: Path) -> None:
    """COM shift, Gamma_max and NOONity against time, with one-sigma bands."""
    times = np.array(stats.times)
    series = [(r"$\Delta P/d$", stats.mean_com_shift, stats.std_com_shift)]
    if stats.mean_gamma_max is not None:
        series.append((r"$\Gamma^{max}$", stats.mean_gamma_max, stats.std_gamma_max))
    if stats.mean_nity is not None:
        series.append(("Nity", stats.mean_nity, stats.std_nity))

    fig, axes = plt.subplots(len(series), 1, figsize=(6, 2.2 * len(series)), sharex=True, squeeze=False)
    for ax, (label, mean, std) in zip(axes[:, 0], series):
        mean, std = np.array(mean), np.array(std)
        ax.plot(times, mean, color="tab:blue")
        ax.fill_between(times, mean - std, mean + std, color="tab:blue", alpha=0.25, linewidth=0)
        ax.set_ylabel(label)
    if stats.stage_clock is not None:
        for ax in axes[:, 0]:
            for boundary in stats.stage_clock.boundaries[1:-1]:
                ax.axvline(boundary, color="gray", linestyle="--", linewidth=0.8)
    axes[-1, 0].set_xlabel("t (1/J)")
    _save(fig, path)


def plot_scan(rows: Sequence[DisorderScanRow], path: Path, label: str = "amplitude") -> None:
    amplitudes = [row.amplitude for row in rows]
    columns: List = []
    for name, title in (("fidelity", "F"), ("com_shift", r"$\Delta P/d$"), ("nity", "Nity")):
        means = [getattr(row, f"mean_{name}") for row in rows]
        if all(m is not None for m in means):
            stds = [getattr(row, f"std_{name}") for row in rows]
            columns.append((title, means, stds))

    fig, axes = plt.subplots(len(columns), 1, figsize=(5, 2.2 * len(columns)), sharex=True, squeeze=False)
    for ax, (title, means, stds) in zip(axes[:, 0], columns):
        ax.errorbar(amplitudes, means, yerr=stds, marker="o", capsize=3)
        ax.set_ylabel(title)
    axes[-1, 0].set_xlabel(label)
    _save(fig, path)


def plot_gap(bands: BandStructure, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(bands.phi, bands.gap)
    ax.set_xlabel(r"$\phi$")
    ax.set_ylabel("G")
    _save(fig, path)
