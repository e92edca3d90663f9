import numpy as np
import pytest

from pumpsim.core.exceptions import BasisMismatchError, ValidationError
from pumpsim.physics.fock2 import (
    center_of_mass,
    com_shift,
    correlation,
    density,
    fidelity,
    from_tensor,
    gamma_max,
    make_state,
    noon_state,
    noonity,
    observe,
    state_tensor,
    superpose,
    symmetric_lift,
    wannier_pair_state,
)
from pumpsim.physics.bloch import wannier_state
from pumpsim.schemas.fock import ObservableRecord, TwoBosonState, sym_basis


def test_basis_size_and_order():
    basis = sym_basis(18)
    assert basis.size == 171
    assert basis.pair(0) == (1, 1)
    assert basis.pair(1) == (1, 2)
    assert basis.index(3, 2) == basis.index(2, 3)


def test_make_state_is_order_free():
    assert np.array_equal(make_state(9, 10).amplitudes, make_state(10, 9).amplitudes)


def test_make_state_rejects_bad_site():
    with pytest.raises(ValidationError):
        make_state(0, 3)


def test_doubly_occupied_site():
    state = make_state(7, 7)
    n = density(state)
    assert n.sum() == pytest.approx(2.0)
    assert n[6] == pytest.approx(2.0)
    gamma = correlation(state)
    assert gamma_max(gamma) == pytest.approx(2.0)
    assert noonity(gamma) == pytest.approx(0.0)


def test_split_pair_has_negative_noonity():
    gamma = correlation(make_state(9, 10))
    assert gamma.gamma[8, 9] == pytest.approx(1.0)
    assert gamma_max(gamma) == pytest.approx(0.0)
    assert noonity(gamma) == pytest.approx(-2.0)


def test_noon_state_reaches_maximum():
    state = noon_state(7, 12)
    gamma = correlation(state)
    assert gamma.gamma[6, 6] == pytest.approx(1.0)
    assert gamma.gamma[11, 11] == pytest.approx(1.0)
    assert noonity(gamma) == pytest.approx(2.0)


def test_noon_needs_two_sites():
    with pytest.raises(ValidationError):
        noon_state(3, 3)


def test_tensor_norm_matches_amplitudes():
    state = superpose([(1.0, 2, 2), (1j, 2, 5), (0.5, 4, 7)], 8)
    psi = state_tensor(state)
    assert np.allclose(psi, psi.T)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_fidelity():
    noon = noon_state(3, 6, 8)
    assert fidelity(make_state(3, 3, 8), noon) == pytest.approx(2**-0.5)
    assert fidelity(noon, noon) == pytest.approx(1.0)
    with pytest.raises(BasisMismatchError):
        fidelity(make_state(1, 1, 8), make_state(1, 1, 10))


def test_zero_superposition_rejected():
    with pytest.raises(ValidationError):
        superpose([(1.0, 1, 1), (-1.0, 1, 1)], 4)


def test_center_of_mass_and_shift():
    assert center_of_mass([0, 1, 0, 1]) == pytest.approx(3.0)
    start = ObservableRecord(t=0.0, phi=0.0, density=[2, 0, 0, 0], com=1.0)
    end = ObservableRecord(t=1.0, phi=0.1, density=[0, 0, 2, 0], com=3.0)
    assert com_shift(start, end) == pytest.approx(1.0)


def test_observe_two_boson_record():
    record = observe(make_state(4, 4, 6), 1.5, 0.2, target=make_state(4, 4, 6))
    assert record.com == pytest.approx(4.0)
    assert record.gamma_max == pytest.approx(2.0)
    assert record.fidelity == pytest.approx(1.0)


def test_observe_single_particle_record():
    psi = np.zeros(6, dtype=complex)
    psi[2] = 1.0
    record = observe(psi, 0.0, 0.0)
    assert record.com == pytest.approx(3.0)
    assert record.gamma_max is None
    assert record.fidelity is None


def test_symmetric_lift_spectrum():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(5, 5))
    h = a + a.T
    lifted = symmetric_lift(h, sym_basis(5))
    energies = np.linalg.eigvalsh(h)
    pairs = sorted(energies[i] + energies[j] for i in range(5) for j in range(i, 5))
    assert np.allclose(np.linalg.eigvalsh(lifted), pairs)


def test_wannier_pair_is_normalized(params):
    w1 = wannier_state(params, 0.0, band=2, cell=4)
    w2 = wannier_state(params, 0.0, band=1, cell=6)
    pair = wannier_pair_state(w1, w2)
    assert np.linalg.norm(pair.amplitudes) == pytest.approx(1.0)
    assert density(pair).sum() == pytest.approx(2.0)


def random_state(rng, n_sites):
    basis = sym_basis(n_sites)
    amplitudes = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
    return TwoBosonState(amplitudes=amplitudes / np.linalg.norm(amplitudes), basis=basis)


def test_noonity_range_over_random_states():
    rng = np.random.default_rng(17)
    lowest, highest = np.inf, -np.inf
    for _ in range(20):
        a = rng.normal(size=(5_000, 18, 18)) + 1j * rng.normal(size=(5_000, 18, 18))
        psi = a + np.swapaxes(a, 1, 2)
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2, axis=(1, 2)))[:, None, None]
        for gamma in 2.0 * np.abs(psi) ** 2:
            value = noonity(gamma)
            lowest, highest = min(lowest, value), max(highest, value)
    assert lowest >= -2.0
    assert highest <= 2.0


def test_noonity_exact_maximum_exceeds_two():
    # Equal weight on every doubly occupied site of M sites gives 4 (1 - 1/M).
    state = superpose([(1.0, q, q) for q in range(1, 5)], 4)
    assert noonity(correlation(state)) == pytest.approx(3.0)


def test_noonity_ignores_global_phase():
    state = random_state(np.random.default_rng(2), 8)
    rotated = TwoBosonState(amplitudes=np.exp(0.83j) * state.amplitudes, basis=state.basis)
    assert noonity(correlation(rotated)) == pytest.approx(noonity(correlation(state)), abs=1e-12)


def test_noonity_ignores_site_relabelling():
    rng = np.random.default_rng(4)
    state = random_state(rng, 8)
    order = rng.permutation(8)
    psi = state_tensor(state)[np.ix_(order, order)]
    relabelled = TwoBosonState(amplitudes=from_tensor(psi, state.basis), basis=state.basis)
    assert noonity(correlation(relabelled)) == pytest.approx(noonity(correlation(state)), abs=1e-12)
    assert noonity(correlation(noon_state(6, 3, 8))) == pytest.approx(noonity(correlation(noon_state(3, 6, 8))))
