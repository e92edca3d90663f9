import math

import numpy as np
import pytest

from pumpsim.core.exceptions import ValidationError
from pumpsim.physics.bloch import (
    analytic_gap,
    band_energies,
    band_gap,
    band_solution,
    band_structure,
    bloch_hamiltonian,
    bloch_matrices,
    chern_numbers,
    com_of_wannier,
    link_chern,
    wannier_state,
)
from pumpsim.schemas.model import RiceMeleParams


def test_bloch_matrix_is_hermitian(params):
    h = bloch_hamiltonian(params, 0.4, 1.1).matrix
    assert np.allclose(h, h.conj().T)


def test_band_energies_match_diagonalization(params):
    for k, phi in [(0.0, 0.0), (0.3, 1.2), (-1.1, 4.0)]:
        lower, upper = band_energies(params, k, phi)
        solution = band_solution(params, k, phi)
        assert solution.energies == pytest.approx((float(lower), float(upper)))


def test_gap_extremes(params):
    assert analytic_gap(params, 0.0) == pytest.approx(40.0)
    assert analytic_gap(params, math.pi / 2) == pytest.approx(4.0)


def test_numerical_gap_matches_closed_form(params):
    for phi in (0.0, 0.5, math.pi / 2, 2.0, 4.5):
        assert band_gap(params, phi) == pytest.approx(analytic_gap(params, phi), rel=1e-9)


def test_chern_numbers(params):
    result = chern_numbers(params)
    assert (result.nu1, result.nu2) == (-1, 1)
    assert result.grid == (101, 101)
    assert sum(result.raw) == pytest.approx(0.0, abs=1e-9)


def test_reversed_pump_flips_chern_numbers(params):
    result = chern_numbers(params, orientation=-1)
    assert (result.nu1, result.nu2) == (1, -1)


def test_curvature_integral_agrees_with_links():
    smooth = RiceMeleParams(delta0=1.0, Delta0=1.0)
    result = chern_numbers(smooth)
    assert result.curvature_integral[0] == pytest.approx(result.nu1, abs=0.02)
    assert result.curvature_integral[1] == pytest.approx(result.nu2, abs=0.02)


def test_chern_grid_minimum(params):
    with pytest.raises(ValidationError):
        chern_numbers(params, n_k=8, n_t=101)


def test_chern_orientation_checked(params):
    with pytest.raises(ValidationError):
        chern_numbers(params, orientation=2)


def test_wannier_states_sit_on_their_sublattice(params):
    upper = wannier_state(params, 0.0, band=2, cell=4)
    lower = wannier_state(params, 0.0, band=1, cell=4)
    assert np.linalg.norm(upper.amplitudes) == pytest.approx(1.0)
    assert abs(upper.amplitudes[6]) ** 2 > 0.99
    assert abs(lower.amplitudes[7]) ** 2 > 0.99
    assert com_of_wannier(upper) == pytest.approx(7.0, abs=0.05)
    assert com_of_wannier((upper, lower)) == pytest.approx(7.5, abs=0.05)


def test_wannier_cell_range(params):
    with pytest.raises(ValidationError):
        wannier_state(params, 0.0, band=1, cell=10)


def test_band_structure_shape(params):
    bands = band_structure(params, n_k=16, n_phi=8)
    assert bands.lower.shape == (8, 16)
    assert np.all(bands.upper >= bands.lower)
    assert bands.gap[0] == pytest.approx(40.0)


def test_bloch_matrices_hermitian_on_random_points(params):
    rng = np.random.default_rng(3)
    h = bloch_matrices(params, rng.uniform(-math.pi, math.pi, 100), rng.uniform(0, 2 * math.pi, 100))
    assert np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2)))) <= 1e-14


def test_closed_form_bands_on_random_points(params):
    rng = np.random.default_rng(5)
    k = rng.uniform(-math.pi, math.pi, 100)
    phi = rng.uniform(0, 2 * math.pi, 100)
    energies = np.linalg.eigvalsh(bloch_matrices(params, k, phi))
    lower, upper = band_energies(params, k, phi)
    assert np.max(np.abs(energies[:, 0] - lower)) <= 1e-12
    assert np.max(np.abs(energies[:, 1] - upper)) <= 1e-12


def test_link_chern_ignores_gauge(params):
    n = 51
    theta, phi = np.meshgrid(
        2 * math.pi * np.arange(n) / n, 2 * math.pi * np.arange(n) / n, indexing="ij"
    )
    states = np.linalg.eigh(bloch_matrices(params, theta / 2.0, phi))[1][..., :, 1]
    alpha = np.random.default_rng(9).uniform(0, 2 * math.pi, (n, n))
    plain = link_chern(states)
    assert plain == pytest.approx(round(plain), abs=1e-6)
    assert link_chern(states * np.exp(1j * alpha)[..., None]) == pytest.approx(plain, abs=1e-9)


def test_raw_link_sums_are_integers(params):
    result = chern_numbers(params)
    for raw in result.raw:
        assert abs(raw - round(raw)) < 1e-6


def test_chern_numbers_do_not_depend_on_grid(params):
    coarse = chern_numbers(params, n_k=51, n_t=51)
    fine = chern_numbers(params, n_k=101, n_t=101)
    assert (coarse.nu1, coarse.nu2) == (fine.nu1, fine.nu2) == (-1, 1)


@pytest.mark.parametrize("phi", [0.0, 0.7, math.pi / 2, 3.0, 3 * math.pi / 2])
def test_wannier_basis_is_orthonormal(params, phi):
    w = np.stack(
        [wannier_state(params, phi, band, cell).amplitudes for band in (1, 2) for cell in range(1, 10)],
        axis=1,
    )
    assert np.allclose(w.conj().T @ w, np.eye(18), atol=1e-10)


@pytest.mark.parametrize("band", [1, 2])
def test_wannier_states_translate_with_cell(params, band):
    for cell in range(1, 9):
        here = wannier_state(params, 0.7, band, cell).amplitudes
        there = wannier_state(params, 0.7, band, cell + 1).amplitudes
        assert abs(np.vdot(np.roll(here, 2), there)) == pytest.approx(1.0, abs=1e-10)


def test_wannier_states_stay_local(params):
    for phi in np.linspace(0, 2 * math.pi, 8, endpoint=False):
        for band in (1, 2):
            amplitudes = wannier_state(params, phi, band, 5).amplitudes
            assert 1.0 / np.sum(np.abs(amplitudes) ** 4) < 3.0
