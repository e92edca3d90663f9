"""Symmetric two-boson states and the observables measured on them.

Amplitudes live on the symmetric basis |j, j'> (j <= j'). For propagation
and observables they are mapped to the symmetric first-quantized matrix
Psi with Psi[j, j] = a_jj and Psi[j, j'] = Psi[j', j] = a_jj' / sqrt(2), so
that the Frobenius norm of Psi equals the norm of the amplitude vector.
"""
import math
from functools import lru_cache
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from pumpsim.core.constants import DEFAULT_CELLS, UNIT_CELL_LENGTH
from pumpsim.core.exceptions import BasisMismatchError, ValidationError
from pumpsim.schemas.bloch import WannierState
from pumpsim.schemas.fock import (
    CorrelationMatrix,
    ObservableRecord,
    SymBasis,
    TwoBosonState,
    sym_basis,
)

DEFAULT_SITES = 2 * DEFAULT_CELLS
SQRT2 = math.sqrt(2.0)


def make_state(j: int, j2: int, n_sites: int = DEFAULT_SITES) -> TwoBosonState:
    """Basis state |j, j2> with 1-based sites; order of j and j2 is irrelevant."""
    basis = sym_basis(n_sites)
    try:
        index = basis.index(j, j2)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    amplitudes = np.zeros(basis.size, dtype=complex)
    amplitudes[index] = 1.0
    return TwoBosonState(amplitudes=amplitudes, basis=basis)


def superpose(terms: Iterable[Tuple[complex, int, int]], n_sites: int = DEFAULT_SITES) -> TwoBosonState:
    """Normalized sum of coefficient * |j, j2> terms."""
    basis = sym_basis(n_sites)
    amplitudes = np.zeros(basis.size, dtype=complex)
    for coefficient, j, j2 in terms:
        try:
            amplitudes[basis.index(j, j2)] += coefficient
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    norm = np.linalg.norm(amplitudes)
    if norm == 0:
        raise ValidationError("superposition has zero norm")
    return TwoBosonState(amplitudes=amplitudes / norm, basis=basis)


def noon_state(a: int, b: int, n_sites: int = DEFAULT_SITES, sign: int = -1) -> TwoBosonState:
    """(|a, a> + sign |b, b>) / sqrt(2)."""
    if a == b:
        raise ValidationError("a NOON state needs two different sites")
    return superpose([(1.0, a, a), (float(sign), b, b)], n_sites)


def to_tensor(amplitudes: np.ndarray, basis: SymBasis) -> np.ndarray:
    values = np.where(basis.diagonal, amplitudes, amplitudes / SQRT2)
    psi = np.zeros((basis.n_sites, basis.n_sites), dtype=complex)
    psi[basis.rows, basis.cols] = values
    psi[basis.cols, basis.rows] = values
    return psi


def from_tensor(psi: np.ndarray, basis: SymBasis) -> np.ndarray:
    upper = psi[basis.rows, basis.cols]
    lower = psi[basis.cols, basis.rows]
    return np.where(basis.diagonal, upper, (upper + lower) / SQRT2)


def state_tensor(state: TwoBosonState) -> np.ndarray:
    return to_tensor(state.amplitudes, state.basis)


def _gamma_from_tensor(psi: np.ndarray) -> np.ndarray:
    return 2.0 * np.abs(psi) ** 2


def density(state: TwoBosonState) -> np.ndarray:
    """<n_j> per site; sums to 2."""
    return np.sum(_gamma_from_tensor(state_tensor(state)), axis=1)


def correlation(state: TwoBosonState) -> CorrelationMatrix:
    """Gamma_{q,r} = <c+_q c+_r c_r c_q> = 2 |Psi_qr|^2."""
    gamma = _gamma_from_tensor(state_tensor(state))
    gamma.setflags(write=False)
    return CorrelationMatrix(gamma=gamma)


def _gamma_array(gamma: Union[CorrelationMatrix, np.ndarray]) -> np.ndarray:
    return gamma.gamma if isinstance(gamma, CorrelationMatrix) else np.asarray(gamma)


def gamma_max(gamma: Union[CorrelationMatrix, np.ndarray]) -> float:
    return float(np.max(np.diag(_gamma_array(gamma))))


def noonity(gamma: Union[CorrelationMatrix, np.ndarray]) -> float:
    """(sum_q Gamma_qq)^2 - sum_{q,r} Gamma_qr^2."""
    g = _gamma_array(gamma)
    return float(np.trace(g) ** 2 - np.sum(g**2))


def fidelity(state: TwoBosonState, target: TwoBosonState) -> float:
    """|<target|state>|.

    Raises:
        BasisMismatchError: If the states live on chains of different length
    """
    if state.basis != target.basis:
        raise BasisMismatchError(target.n_sites, state.n_sites)
    return float(abs(np.vdot(target.amplitudes, state.amplitudes)))


def center_of_mass(site_density: np.ndarray) -> float:
    """X = N^-1 sum_j j <n_j> with 1-based j."""
    site_density = np.asarray(site_density, dtype=float)
    sites = np.arange(1, site_density.shape[0] + 1)
    return float(np.sum(sites * site_density) / np.sum(site_density))


def com_shift(
    record_start: ObservableRecord, record_end: ObservableRecord, d: float = UNIT_CELL_LENGTH
) -> float:
    """Pumped distance in unit cells, (X_end - X_start) / d."""
    if len(record_start.density) != len(record_end.density):
        raise BasisMismatchError(len(record_start.density), len(record_end.density))
    return (record_end.com - record_start.com) / d


def observe(
    state: Union[TwoBosonState, np.ndarray],
    t: float,
    phi: float,
    target: Optional[Union[TwoBosonState, np.ndarray]] = None,
) -> ObservableRecord:
    """Observables of a two-boson state, or of a single-particle vector."""
    if isinstance(state, TwoBosonState):
        gamma = _gamma_from_tensor(state_tensor(state))
        site_density = np.sum(gamma, axis=1)
        return ObservableRecord(
            t=t,
            phi=phi,
            density=site_density.tolist(),
            com=center_of_mass(site_density),
            gamma_max=gamma_max(gamma),
            nity=noonity(gamma),
            fidelity=None if target is None else fidelity(state, target),
        )

    psi = np.asarray(state)
    site_density = np.abs(psi) ** 2
    overlap = None
    if target is not None:
        target = np.asarray(target)
        if target.shape != psi.shape:
            raise BasisMismatchError(target.shape[0], psi.shape[0])
        overlap = float(abs(np.vdot(target, psi)))
    return ObservableRecord(
        t=t,
        phi=phi,
        density=site_density.tolist(),
        com=center_of_mass(site_density),
        fidelity=overlap,
    )


@lru_cache(maxsize=16)
def _isometry(n_sites: int) -> np.ndarray:
    """Columns are the flattened tensors of the symmetric basis vectors."""
    basis = sym_basis(n_sites)
    columns = np.zeros((n_sites * n_sites, basis.size))
    weight = np.where(basis.diagonal, 1.0, 1.0 / SQRT2)
    columns[basis.rows * n_sites + basis.cols, np.arange(basis.size)] = weight
    columns[basis.cols * n_sites + basis.rows, np.arange(basis.size)] = weight
    columns.setflags(write=False)
    return columns


def symmetric_lift(h: np.ndarray, basis: SymBasis) -> np.ndarray:
    """Matrix of h (x) 1 + 1 (x) h on the symmetric subspace."""
    h = np.asarray(h)
    if h.shape != (basis.n_sites, basis.n_sites):
        raise ValidationError(f"expected a {basis.n_sites}x{basis.n_sites} matrix, got {h.shape}")
    identity = np.eye(basis.n_sites)
    generator = np.kron(h, identity) + np.kron(identity, h)
    isometry = _isometry(basis.n_sites)
    return isometry.T @ generator @ isometry


def wannier_pair_state(w1: WannierState, w2: WannierState) -> TwoBosonState:
    """Symmetrized two-particle state of two Wannier orbitals, normalized."""
    if w1.n_sites != w2.n_sites:
        raise BasisMismatchError(w1.n_sites, w2.n_sites)
    psi = np.outer(w1.amplitudes, w2.amplitudes)
    psi = psi + psi.T
    basis = sym_basis(w1.n_sites)
    amplitudes = from_tensor(psi, basis)
    return TwoBosonState(amplitudes=amplitudes / np.linalg.norm(amplitudes), basis=basis)
