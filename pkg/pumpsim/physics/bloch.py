"""Momentum-space analysis of the clean chain.

Gauge convention: with theta = k d (d = 2 sites per cell) and Bloch states
psi(cell l, s) = exp(i theta l) u[s], the Bloch matrix is

    [[ Delta,                    -(J1 + J2 exp(-i theta)) ],
     [ -(J1 + J2 exp(i theta)),  -Delta                   ]]

Chern numbers are taken on the (theta, phi) torus with theta as the first
axis; with this orientation the band pumped towards larger site indices
carries +1.
"""
import math
from typing import Tuple, Union

import numpy as np

from pumpsim.core.constants import (
    CHERN_INTEGER_TOLERANCE,
    DEFAULT_CHERN_GRID,
    GAP_GRID_POINTS,
    MIN_CHERN_GRID,
    UNIT_CELL_LENGTH,
)
from pumpsim.core.exceptions import GridTooCoarseError, ValidationError
from pumpsim.core.logging_config import get_logger
from pumpsim.physics.model import modulation
from pumpsim.schemas.bloch import (
    BandSolution,
    BandStructure,
    BlochHamiltonian,
    ChernResult,
    WannierState,
)
from pumpsim.schemas.model import RiceMeleParams

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]
TWO_PI = 2.0 * math.pi


def bloch_matrices(params: RiceMeleParams, k: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """Bloch matrices broadcast over ``k`` and ``phi``, shape (..., 2, 2)."""
    theta = np.asarray(k, dtype=float) * UNIT_CELL_LENGTH
    j1, j2, delta = modulation(params, np.asarray(phi, dtype=float))
    theta, j1, j2, delta = np.broadcast_arrays(theta, j1, j2, delta)
    off = -(j1 + j2 * np.exp(-1j * theta))
    matrices = np.empty(theta.shape + (2, 2), dtype=complex)
    matrices[..., 0, 0] = delta
    matrices[..., 1, 1] = -delta
    matrices[..., 0, 1] = off
    matrices[..., 1, 0] = np.conj(off)
    return matrices


def bloch_hamiltonian(params: RiceMeleParams, k: float, phi: float) -> BlochHamiltonian:
    return BlochHamiltonian(k=k, phi=phi, matrix=bloch_matrices(params, k, phi))


def band_solution(params: RiceMeleParams, k: float, phi: float) -> BandSolution:
    energies, states = np.linalg.eigh(bloch_matrices(params, k, phi))
    return BandSolution(energies=(float(energies[0]), float(energies[1])), states=states)


def band_energies(params: RiceMeleParams, k: ArrayLike, phi: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form (E1, E2) = -/+ sqrt(Delta^2 + J1^2 + J2^2 + 2 J1 J2 cos kd)."""
    theta = np.asarray(k, dtype=float) * UNIT_CELL_LENGTH
    j1, j2, delta = modulation(params, np.asarray(phi, dtype=float))
    e = np.sqrt(delta**2 + j1**2 + j2**2 + 2.0 * j1 * j2 * np.cos(theta))
    return -e, e


def analytic_gap(params: RiceMeleParams, phi: ArrayLike) -> ArrayLike:
    """Minimum direct gap, G = 2 sqrt(Delta^2 + (|J1| - |J2|)^2)."""
    j1, j2, delta = modulation(params, phi)
    gap = 2.0 * np.sqrt(delta**2 + (np.abs(j1) - np.abs(j2)) ** 2)
    if np.ndim(gap) == 0:
        return float(gap)
    return gap


def band_gap(params: RiceMeleParams, phi: float, n_k: int = GAP_GRID_POINTS) -> float:
    """min_k (E2 - E1) from numerical diagonalization on an n_k-point grid."""
    theta = np.linspace(-math.pi, math.pi, n_k, endpoint=False)
    energies = np.linalg.eigvalsh(bloch_matrices(params, theta / UNIT_CELL_LENGTH, phi))
    return float(np.min(energies[:, 1] - energies[:, 0]))


def _d_theta(params: RiceMeleParams, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    _, j2, _ = modulation(params, phi)
    theta, j2 = np.broadcast_arrays(theta, j2)
    out = np.zeros(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = 1j * j2 * np.exp(-1j * theta)
    out[..., 1, 0] = -1j * j2 * np.exp(1j * theta)
    return out


def _d_phi(params: RiceMeleParams, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    theta, phi = np.broadcast_arrays(theta, np.asarray(phi, dtype=float))
    d_delta = -params.Delta0 * np.sin(phi)
    d_j1 = params.delta0 * np.cos(phi)
    d_j2 = -params.delta0 * np.cos(phi)
    off = -(d_j1 + d_j2 * np.exp(-1j * theta))
    out = np.empty(theta.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = d_delta
    out[..., 1, 1] = -d_delta
    out[..., 0, 1] = off
    out[..., 1, 0] = np.conj(off)
    return out


def berry_curvature(params: RiceMeleParams, k: ArrayLike, phi: ArrayLike, band: int) -> np.ndarray:
    """Sum-over-states Berry curvature F_n(k, phi) per unit theta and phi.

    F_n = i [<n|dH/dphi|m><m|dH/dtheta|n> - <n|dH/dtheta|m><m|dH/dphi|n>] / (E_n - E_m)^2
    """
    if band not in (1, 2):
        raise ValidationError("band must be 1 or 2")
    theta = np.asarray(k, dtype=float) * UNIT_CELL_LENGTH
    phi = np.asarray(phi, dtype=float)
    energies, states = np.linalg.eigh(bloch_matrices(params, k, phi))
    n, m = band - 1, 2 - band
    u_n = states[..., :, n]
    u_m = states[..., :, m]

    def element(left, matrix, right):
        return np.einsum("...i,...ij,...j->...", np.conj(left), matrix, right)

    dt = _d_theta(params, theta, phi)
    dp = _d_phi(params, theta, phi)
    numerator = element(u_n, dp, u_m) * element(u_m, dt, u_n) - element(u_n, dt, u_m) * element(
        u_m, dp, u_n
    )
    gap = energies[..., n] - energies[..., m]
    return np.real(1j * numerator) / gap**2


def link_chern(states: np.ndarray) -> float:
    """Link-variable Chern number of an (N_k, N_t, dim) array of band states.

    Both axes are periodic; the first axis is theta, the second phi.
    """
    link_k = np.sum(np.conj(states) * np.roll(states, -1, axis=0), axis=-1)
    link_t = np.sum(np.conj(states) * np.roll(states, -1, axis=1), axis=-1)
    link_k = link_k / np.abs(link_k)
    link_t = link_t / np.abs(link_t)
    plaquette = link_k * np.roll(link_t, -1, axis=0) / (np.roll(link_k, -1, axis=1) * link_t)
    return float(np.sum(np.angle(plaquette)) / TWO_PI)


def _torus(n_k: int, n_t: int, offset: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    theta = TWO_PI * (np.arange(n_k) + offset) / n_k
    phi = TWO_PI * (np.arange(n_t) + offset) / n_t
    return np.meshgrid(theta, phi, indexing="ij")


def chern_numbers(
    params: RiceMeleParams,
    n_k: int = DEFAULT_CHERN_GRID,
    n_t: int = DEFAULT_CHERN_GRID,
    orientation: int = 1,
) -> ChernResult:
    """Chern numbers of both bands on the (k, phi) torus.

    Args:
        params: Chain parameters (L is irrelevant here)
        n_k: Grid points along k
        n_t: Grid points along phi
        orientation: +1 for increasing phi, -1 for the reversed pump

    Returns:
        ChernResult with rounded integers, raw link sums and the
        midpoint-rule integral of the analytic curvature

    Raises:
        ValidationError: If a grid dimension is below the minimum or the orientation is not +-1
        GridTooCoarseError: If a raw sum is further than the tolerance from an integer
    """
    if min(n_k, n_t) < MIN_CHERN_GRID:
        raise ValidationError(f"Chern grid must be at least {MIN_CHERN_GRID}x{MIN_CHERN_GRID}")
    if orientation not in (1, -1):
        raise ValidationError("orientation must be +1 or -1")

    theta, phi = _torus(n_k, n_t)
    _, states = np.linalg.eigh(bloch_matrices(params, theta / UNIT_CELL_LENGTH, orientation * phi))
    raw = tuple(link_chern(states[..., :, band]) for band in range(2))

    theta_mid, phi_mid = _torus(n_k, n_t, offset=0.5)
    cell_area = (TWO_PI / n_k) * (TWO_PI / n_t)
    curvature = tuple(
        orientation
        * float(
            np.sum(berry_curvature(params, theta_mid / UNIT_CELL_LENGTH, orientation * phi_mid, band))
        )
        * cell_area
        / TWO_PI
        for band in (1, 2)
    )

    for value in raw:
        if abs(value - round(value)) > CHERN_INTEGER_TOLERANCE:
            raise GridTooCoarseError(value, n_k, n_t)
    nu1, nu2 = (int(round(value)) for value in raw)
    logger.debug(f"Chern numbers on {n_k}x{n_t}: raw={raw}, curvature={curvature}")
    return ChernResult(nu1=nu1, nu2=nu2, grid=(n_k, n_t), raw=raw, curvature_integral=curvature)


def _smooth_gauge(states: np.ndarray) -> np.ndarray:
    """Parallel transport along the closed k-loop, then spread the leftover phase evenly."""
    u = states.copy()
    n_k = u.shape[0]
    for m in range(1, n_k):
        overlap = np.vdot(u[m - 1], u[m])
        u[m] *= np.exp(-1j * np.angle(overlap))
    chi = np.angle(np.vdot(u[n_k - 1], u[0]))
    u *= np.exp(1j * chi * np.arange(n_k) / n_k)[:, None]
    return u


def wannier_state(params: RiceMeleParams, phi: float, band: int, cell: int) -> WannierState:
    """Wannier state of ``band`` centred on 1-based ``cell``.

    Built from L Bloch states on the k-grid of the finite chain in a
    parallel-transport gauge; cells wrap periodically.
    """
    if band not in (1, 2):
        raise ValidationError("band must be 1 or 2")
    if not 1 <= cell <= params.L:
        raise ValidationError(f"cell {cell} outside 1..{params.L}")

    n_cells = params.L
    theta = TWO_PI * np.arange(n_cells) / n_cells
    _, states = np.linalg.eigh(bloch_matrices(params, theta / UNIT_CELL_LENGTH, phi))
    u = _smooth_gauge(states[:, :, band - 1])

    cells = np.arange(n_cells)
    phases = np.exp(1j * np.outer(cells - (cell - 1), theta))
    amplitudes = (phases @ u / n_cells).reshape(-1)

    peak = int(np.argmax(np.abs(amplitudes)))
    amplitudes *= np.conj(amplitudes[peak]) / np.abs(amplitudes[peak])
    amplitudes.setflags(write=False)
    return WannierState(band=band, cell=cell, phi=phi, amplitudes=amplitudes)


def com_of_wannier(w: Union[WannierState, Tuple[WannierState, WannierState]]) -> float:
    """Centre of mass (1-based site units) of a Wannier state or of a two-particle pair."""
    if isinstance(w, WannierState):
        weights = np.abs(w.amplitudes) ** 2
        return float(np.sum(np.arange(1, w.n_sites + 1) * weights) / np.sum(weights))
    return 0.5 * (com_of_wannier(w[0]) + com_of_wannier(w[1]))


def band_structure(params: RiceMeleParams, n_k: int = 128, n_phi: int = 128) -> BandStructure:
    """E1, E2 on k in [-pi/d, pi/d) and phi in [0, 2 pi), plus the gap per phi."""
    k = np.linspace(-math.pi, math.pi, n_k, endpoint=False) / UNIT_CELL_LENGTH
    phi = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    kk, pp = np.meshgrid(k, phi)
    lower, upper = band_energies(params, kk, pp)
    return BandStructure(k=k, phi=phi, lower=lower, upper=upper, gap=analytic_gap(params, phi))
