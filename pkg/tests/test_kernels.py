"""Backend equivalence: the numba kernels and the numpy fallback must agree
bit for bit, since they accumulate per-entry contributions in the same order."""

import numpy as np
import pytest

from spinfid import build_sector_basis
from spinfid import kernels

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


@needs_numba
def test_fill_states_backends_agree():
    for L, n_up in [(8, 4), (10, 3), (12, 6)]:
        dim = int(kernels.BINOM[L, n_up])
        a = kernels.fill_states_numba(L, n_up, dim)
        b = kernels.fill_states_numpy(L, n_up, dim)
        assert np.array_equal(a, b)


@needs_numba
def test_apply_bonds_backends_bit_identical(rng):
    b = build_sector_basis(10, 5)
    v = rng.standard_normal(b.dim)
    for c_nn, c_nnn in [(1.0, 0.37), (1.0, 0.0), (0.0, 1.0)]:
        out_nb = np.empty(b.dim)
        out_np = np.empty(b.dim)
        kernels.apply_bonds_numba(b.states, b.offsets, b.low_rank, b.low_bits,
                                  b.L, c_nn, c_nnn, v, out_nb)
        kernels.apply_bonds_numpy(b.states, b.offsets, b.low_rank, b.low_bits,
                                  b.L, c_nn, c_nnn, v, out_np)
        assert np.array_equal(out_nb, out_np)


def test_rank_tables_match_searchsorted():
    b = build_sector_basis(12, 5)
    low_mask = (1 << b.low_bits) - 1
    via_tables = b.offsets[b.states >> b.low_bits] + b.low_rank[b.states & low_mask]
    via_search = np.searchsorted(b.states, b.states)
    assert np.array_equal(via_tables, via_search)


def test_backend_selection_value():
    assert kernels.BACKEND in ("numba", "numpy")
