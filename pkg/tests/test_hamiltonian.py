import numpy as np
import pytest
import scipy.linalg as sla

from spinfid import (ChainSpec, apply_driving, apply_hamiltonian, build_sector_basis,
                     dense_hamiltonian, ground_state, matvec_factory, rank)


def test_neel_column_l4():
    b = build_sector_basis(4, 2)
    spec = ChainSpec(L=4, lam=0.0)
    v = np.zeros(b.dim)
    v[rank(b, 0b0101)] = 1.0
    out = apply_hamiltonian(spec, b, v)
    # diagonal: four antiparallel bonds at -1/4 each
    assert out[rank(b, 0b0101)] == pytest.approx(-1.0, abs=1e-15)
    for m in (0b0011, 0b0110, 0b1001, 0b1100):
        assert out[rank(b, m)] == pytest.approx(0.5, abs=1e-15)
    assert out[rank(b, 0b1010)] == 0.0


def test_l4_extreme_eigenvalues():
    b = build_sector_basis(4, 2)
    w = np.linalg.eigvalsh(dense_hamiltonian(ChainSpec(4, 0.0), b))
    assert w[0] == pytest.approx(-2.0, abs=1e-12)
    assert w[-1] == pytest.approx(1.0, abs=1e-12)


def test_majumdar_ghosh_energy_l8():
    b = build_sector_basis(8, 4)
    w = np.linalg.eigvalsh(dense_hamiltonian(ChainSpec(8, 0.5), b))
    assert w[0] == pytest.approx(-3.0, abs=1e-12)


def test_l4_nnn_bonds_double_covered():
    # the literal sum over j = 0..3 of s_j.s_{j+2} counts each diagonal twice
    b = build_sector_basis(4, 2)
    spec = ChainSpec(L=4, lam=0.0)
    v = np.zeros(b.dim)
    v[rank(b, 0b0101)] = 1.0
    out = apply_driving(spec, b, v)
    expected = np.zeros(b.dim)
    expected[rank(b, 0b0101)] = 1.0  # 4 parallel pairs x 1/4
    assert np.allclose(out, expected, atol=1e-15)


def test_linearity_in_lambda(basis_cache, rng):
    b = basis_cache(10)
    v = rng.standard_normal(b.dim)
    lam = 0.437
    lhs = apply_hamiltonian(ChainSpec(10, lam), b, v)
    rhs = (apply_hamiltonian(ChainSpec(10, 0.0), b, v)
           + lam * apply_driving(ChainSpec(10, lam), b, v))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * np.max(np.abs(lhs))


def test_hermiticity(basis_cache, rng):
    for L in (10, 16):
        b = basis_cache(L)
        spec = ChainSpec(L, 0.31)
        u = rng.standard_normal(b.dim)
        v = rng.standard_normal(b.dim)
        a = float(u @ apply_hamiltonian(spec, b, v))
        c = float(apply_hamiltonian(spec, b, u) @ v)
        assert abs(a - c) <= 1e-13 * abs(a)


def test_hellmann_feynman(basis_cache):
    b = basis_cache(8)
    lam, h = 0.2, 1e-4
    sols = {k: ground_state(matvec_factory(b, lam + k * h), b.dim, lam=lam + k * h)
            for k in (-1, 0, 1)}
    dE = (sols[1].energy - sols[-1].energy) / (2 * h)
    v0 = sols[0].vector
    hf = float(v0 @ apply_driving(ChainSpec(8, lam), b, v0))
    assert abs(hf - dE) <= 1e-6


def test_dense_matches_matvec_on_unit_vectors(basis_cache):
    b = basis_cache(10)
    spec = ChainSpec(10, 0.2411)
    H = dense_hamiltonian(spec, b)
    cols = [5, 77, b.dim - 1]
    for c in cols:
        e = np.zeros(b.dim)
        e[c] = 1.0
        assert np.max(np.abs(H[:, c] - apply_hamiltonian(spec, b, e))) <= 1e-14


def test_dense_exactly_symmetric(basis_cache):
    b = basis_cache(10)
    H = dense_hamiltonian(ChainSpec(10, 0.37), b)
    assert np.array_equal(H, H.T)


def test_dense_dimension_guard():
    b = build_sector_basis(16, 8)  # dim 12870
    with pytest.raises(ValueError):
        dense_hamiltonian(ChainSpec(16, 0.1), b)


def test_vector_length_mismatch(basis_cache):
    b = basis_cache(8)
    with pytest.raises(ValueError):
        apply_hamiltonian(ChainSpec(8, 0.0), b, np.zeros(b.dim + 1))


def test_translation_invariance(basis_cache, rng):
    # H commutes with the one-site cyclic rotation of the chain
    L = 8
    b = basis_cache(L)
    spec = ChainSpec(L, 0.3)
    full = (1 << L) - 1

    def rotate_mask(m):
        return ((m << 1) | (m >> (L - 1))) & full

    perm = np.array([rank(b, rotate_mask(int(m))) for m in b.states])
    v = rng.standard_normal(b.dim)
    rv = np.zeros(b.dim)
    rv[perm] = v
    hrv = apply_hamiltonian(spec, b, rv)
    rhv = np.zeros(b.dim)
    rhv[perm] = apply_hamiltonian(spec, b, v)
    assert np.max(np.abs(hrv - rhv)) <= 1e-13

    # spectra agree between the rotated and unrotated labelings
    H = dense_hamiltonian(spec, b)
    e0 = sla.eigh(H, eigvals_only=True, subset_by_index=(0, 0))[0]
    P = np.zeros((b.dim, b.dim))
    P[perm, np.arange(b.dim)] = 1.0
    e0_rot = sla.eigh(P @ H @ P.T, eigvals_only=True, subset_by_index=(0, 0))[0]
    assert e0 == pytest.approx(e0_rot, abs=1e-12)


def test_chainspec_validation():
    with pytest.raises(ValueError):
        ChainSpec(7, 0.1)
    with pytest.raises(ValueError):
        ChainSpec(8, 0.1, boundary="open")
