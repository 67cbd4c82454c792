import numpy as np
import pytest

from spinfid import (ChainSpec, DegenerateGroundStateError, apply_driving,
                     build_sector_basis, chi2_perturbative, chi3_perturbative,
                     d3E_finite_difference, d3E_perturbative, dense_hamiltonian,
                     driving_elements, full_spectrum, make_solver)
from spinfid.eigensolver import GroundStateSolution


def spectrum_and_elements(basis_cache, L, lam):
    b = basis_cache(L)
    spec = full_spectrum(dense_hamiltonian(ChainSpec(L, lam), b), lam=lam, basis=b)
    return b, spec, driving_elements(spec, b)


def test_h00_is_energy_derivative(basis_cache):
    b, spec, elems = spectrum_and_elements(basis_cache, 8, 0.2)
    solver = make_solver(b, "lanczos", tol=1e-13)
    h = 1e-4
    dE = (solver(0.2 + h).energy - solver(0.2 - h).energy) / (2 * h)
    assert abs(elems.elements[0, 0] - dE) <= 1e-6


def test_elements_symmetric(basis_cache):
    _, _, elems = spectrum_and_elements(basis_cache, 8, 0.2)
    M = elems.elements
    assert np.max(np.abs(M - M.T)) < 1e-10


def test_elements_trace_invariant(basis_cache):
    b, spec, elems = spectrum_and_elements(basis_cache, 8, 0.2)
    HI = dense_hamiltonian(ChainSpec(8, 1.0), b) - dense_hamiltonian(ChainSpec(8, 0.0), b)
    assert np.trace(elems.elements) == pytest.approx(np.trace(HI), abs=1e-9)


def test_elements_complete(basis_cache, rng):
    b, spec, elems = spectrum_and_elements(basis_cache, 8, 0.2)
    x = rng.standard_normal(b.dim)
    lhs = elems.elements @ (spec.eigenvectors.T @ x)
    rhs = spec.eigenvectors.T @ apply_driving(ChainSpec(8, 0.2), b, x)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_chi2_toy_single_term():
    M = np.array([[0.0, 0.5], [0.5, 0.0]])
    E = np.array([0.0, 1.0])
    assert chi2_perturbative(M, E) == pytest.approx(0.25)


def test_chi2_nonnegative(basis_cache):
    for lam in (0.0, 0.3):
        _, spec, elems = spectrum_and_elements(basis_cache, 8, lam)
        assert chi2_perturbative(elems, spec.energies) >= 0.0


def test_chi3_vanishes_without_coupling():
    # ground state is an eigenvector of the driving operator
    M = np.diag([0.3, -0.1, 0.7])
    E = np.array([0.0, 1.0, 2.0])
    assert chi3_perturbative(M, E) == 0.0
    assert d3E_perturbative(M, E) == 0.0


def test_degenerate_ground_state_rejected(basis_cache):
    _, spec, elems = spectrum_and_elements(basis_cache, 8, 0.5)
    with pytest.raises(DegenerateGroundStateError):
        chi3_perturbative(elems, spec.energies)


def _poly_solver(f):
    def solve(lam, warm=None):
        return GroundStateSolution(lam=lam, energy=f(lam), second_energy=f(lam) + 1,
                                   vector=np.zeros(2), residual_norm=0.0,
                                   iterations=0, converged=True, seed=0)
    return solve


def test_d3e_fd_annihilates_quadratics():
    d3 = d3E_finite_difference(_poly_solver(lambda x: 2.0 - 3.0 * x + 0.5 * x * x),
                               0.3, h=1e-2)
    assert abs(d3) <= 1e-8


def test_d3e_fd_exact_for_cubics():
    d3 = d3E_finite_difference(_poly_solver(lambda x: x**3), 0.0, h=1e-2)
    assert d3 == pytest.approx(6.0, abs=1e-8)


@pytest.mark.parametrize("L,lam", [(8, 0.2), (10, 0.3)])
def test_d3e_fd_matches_perturbative(basis_cache, L, lam):
    b, spec, elems = spectrum_and_elements(basis_cache, L, lam)
    d3_pert = d3E_perturbative(elems, spec.energies)
    solver = make_solver(b, "lanczos", tol=1e-13)
    d3_fd = d3E_finite_difference(solver, lam, h=5e-3)
    assert abs(d3_fd - d3_pert) <= 0.005 * abs(d3_pert)


def test_d3e_fd_default_step(basis_cache):
    b, spec, elems = spectrum_and_elements(basis_cache, 8, 0.2)
    d3_pert = d3E_perturbative(elems, spec.energies)
    solver = make_solver(b, "lanczos", tol=1e-13)
    d3_fd = d3E_finite_difference(solver, 0.2, h=1e-2)
    assert abs(d3_fd - d3_pert) <= 0.005 * abs(d3_pert)
