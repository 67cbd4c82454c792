import itertools
import math

import numpy as np
import pytest

from spinfid import build_sector_basis, rank, unrank


def test_l4_sector_enumeration():
    b = build_sector_basis(4, 2)
    assert b.dim == 6
    assert b.states.tolist() == [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]


def test_matches_itertools_enumeration():
    b = build_sector_basis(8, 3)
    ref = sorted(sum(1 << p for p in c) for c in itertools.combinations(range(8), 3))
    assert b.states.tolist() == ref


@pytest.mark.parametrize("L,n_up,dim", [(14, 7, 3432), (20, 10, 184756)])
def test_dimensions(L, n_up, dim):
    assert build_sector_basis(L, n_up).dim == dim == math.comb(L, n_up)


def test_dimension_large_sector():
    b = build_sector_basis(26, 13)
    assert b.dim == 10400600
    # spot-check interior ordering without touching every element
    assert b.states[0] == (1 << 13) - 1
    assert b.states[-1] == ((1 << 13) - 1) << 13
    assert rank(b, int(b.states[5_000_000])) == 5_000_000


@pytest.mark.parametrize("L", [4, 6, 8, 10, 12, 14, 16])
def test_rank_unrank_bijection_all_sectors(L):
    for n_up in range(L + 1):
        b = build_sector_basis(L, n_up)
        low_mask = (1 << b.low_bits) - 1
        ranks = b.offsets[b.states >> b.low_bits] + b.low_rank[b.states & low_mask]
        assert np.array_equal(ranks, np.arange(b.dim))
        assert np.all(np.diff(b.states) > 0) or b.dim == 1


def test_dim_matches_binomial_across_sizes():
    for L in range(4, 27, 2):
        assert build_sector_basis(L, L // 2).dim == math.comb(L, L // 2)


def test_rank_examples():
    b = build_sector_basis(4, 2)
    assert rank(b, 0b0101) == 1
    assert rank(b, 0b1100) == 5
    assert unrank(b, 0) == 0b0011
    assert unrank(b, 5) == 0b1100


def test_rank_rejects_bad_masks():
    b = build_sector_basis(4, 2)
    with pytest.raises(ValueError):
        rank(b, 0b0111)  # popcount 3
    with pytest.raises(ValueError):
        rank(b, 0b10101)  # bit outside the chain
    with pytest.raises(IndexError):
        unrank(b, 6)
    with pytest.raises(IndexError):
        unrank(b, -1)


def test_build_validation():
    with pytest.raises(ValueError):
        build_sector_basis(5, 2)
    with pytest.raises(ValueError):
        build_sector_basis(32, 16)
    with pytest.raises(ValueError):
        build_sector_basis(2, 1)
    with pytest.raises(ValueError):
        build_sector_basis(8, 9)
    with pytest.raises(ValueError):
        build_sector_basis(8, -1)


def test_states_are_immutable():
    b = build_sector_basis(6, 3)
    with pytest.raises(ValueError):
        b.states[0] = 0
