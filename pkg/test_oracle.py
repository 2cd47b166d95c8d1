"""Tests der dichten Referenzrechnungen."""
import numpy as np
import pytest

from src import oracle
from src.errors import InvalidParameters, SizeCap
from src.model import CouplingParams, dispersion_table, momentum_grid
from src.validation import spectrum_distance


def test_field_profile_alternates():
    p = CouplingParams(0.5, 0.2)
    assert oracle.field_profile(p, 4) == [0.5 - 0.2j, 0.5 + 0.2j, 0.5 - 0.2j, 0.5 + 0.2j]


def test_spin_hamiltonian_size_cap():
    with pytest.raises(SizeCap):
        oracle.spin_hamiltonian_dense(CouplingParams(0.5, 0.2, N=6), 10)
    with pytest.raises(InvalidParameters):
        oracle.spin_hamiltonian_dense(CouplingParams(0.5, 0.2), 3)


def test_spin_hamiltonian_hermitian_without_xi():
    h = oracle.spin_hamiltonian_dense(CouplingParams(0.7, 0.0, N=2)).matrix
    assert h.shape == (16, 16)
    np.testing.assert_allclose(h, h.conj().T)


def test_spin_parity_commutes_with_hamiltonian():
    h = oracle.spin_hamiltonian_dense(CouplingParams(0.7, 0.4, N=2)).matrix
    parity = oracle.spin_parity(4)
    np.testing.assert_allclose(parity @ h, h @ parity, atol=1e-14)


def test_jordan_wigner_anticommutation():
    c = oracle.jordan_wigner_annihilators(4)
    eye = np.eye(16)
    for i in range(4):
        for j in range(4):
            anti = c[i] @ c[j].conj().T + c[j].conj().T @ c[i]
            np.testing.assert_allclose(anti, eye if i == j else 0 * eye, atol=1e-14)
            np.testing.assert_allclose(c[i] @ c[j] + c[j] @ c[i], 0 * eye, atol=1e-14)


def test_parity_projectors_are_complementary():
    total = oracle.parity_projector(4, 1) + oracle.parity_projector(4, -1)
    np.testing.assert_array_equal(total, np.eye(16))
    with pytest.raises(InvalidParameters):
        oracle.parity_projector(4, 0)


@pytest.mark.parametrize("eta, xi", [(0.4, 0.3), (1.3, -0.6), (-0.5, 1.2)])
def test_jordan_wigner_equivalence(eta, xi):
    p = CouplingParams(eta, xi, N=2)
    spin = np.linalg.eigvals(oracle.spin_hamiltonian_dense(p).matrix)
    union = np.concatenate([oracle.jw_sector_spectrum(p, 4, sigma) for sigma in (1, -1)])
    assert spectrum_distance(spin, union) < 1e-9


def test_kronecker_sum_spectrum():
    p = CouplingParams(0.6, -0.4, N=4)
    k1, k2 = momentum_grid(4).paired
    e1 = 2.0 * dispersion_table(k1, p)
    e2 = 2.0 * dispersion_table(k2, p)
    expected = -(e1[:, None] + e2[None, :]).ravel()
    dense = oracle.fermion_sum_hamiltonian(p, 4)
    assert dense.matrix.shape == (256, 256)
    assert spectrum_distance(np.linalg.eigvals(dense.matrix), expected) < 1e-8


def test_momentum_sectors_reproduce_real_space_hamiltonian():
    p = CouplingParams(0.6, -0.4, N=4)
    real_space = np.linalg.eigvals(oracle.fermion_sector_hamiltonian(p, 8, 1))
    summed = np.linalg.eigvals(oracle.fermion_sum_hamiltonian(p, 4).matrix)
    assert spectrum_distance(real_space, summed) < 1e-8


def test_kronecker_sum_size_cap():
    with pytest.raises(SizeCap):
        oracle.fermion_sum_hamiltonian(CouplingParams(0.5, 0.2, N=6), 6)


def test_fermion_sum_fidelity_trivial_cases():
    p1 = CouplingParams(0.4, 0.1, N=4)
    p2 = CouplingParams(0.45, 0.15, N=4)
    assert oracle.fermion_sum_fidelity(p1, p2, 0.0) == 1.0
    with pytest.raises(InvalidParameters):
        oracle.fermion_sum_fidelity(p1, p2, -1.0)


@pytest.mark.parametrize("eta, xi", [(0.4, 0.1), (0.3, 1.3)])
def test_fermion_sum_fidelity_of_state_with_itself(eta, xi):
    p = CouplingParams(eta, xi, N=4)
    assert oracle.fermion_sum_fidelity(p, p, 2.0) == pytest.approx(1.0, abs=1e-9)


def test_uhlmann_fidelity_with_nearly_pure_states():
    # Eigenwerte bis 1e-30, die Nuklearnorm braucht keine Wurzel daraus
    rho = np.diag([1.0 - 1e-30, 1e-30, 0.0])
    sigma = np.diag([1.0 - 1e-24, 0.0, 1e-24])
    assert oracle.uhlmann_fidelity(rho, sigma) == pytest.approx(1.0, abs=1e-14)


def test_uhlmann_fidelity_of_state_with_itself(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    assert oracle.uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)


def test_hermitian_reference_requires_real_field():
    with pytest.raises(InvalidParameters):
        oracle.hermitian_total_fidelity(CouplingParams(0.5, 0.1), CouplingParams(0.5, 0.0), 1.0)
    p = CouplingParams(0.5, 0.0, N=8)
    assert oracle.hermitian_total_fidelity(p, p, 2.0) == pytest.approx(1.0, abs=1e-9)
