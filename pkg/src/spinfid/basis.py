"""Fixed total-Sz bitstring bases for spin-1/2 chains.

A sector basis holds every L-bit mask with a given number of up spins,
sorted ascending, together with two small lookup tables that invert the
enumeration in O(1): the mask is split into a low and a high half, the
high half indexes the first sector state sharing it, and the low half
indexes the combinadic rank within that block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .kernels import BINOM, MAX_SITES


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Immutable fixed-magnetization sector of an L-site spin-1/2 chain."""

    L: int
    n_up: int
    states: np.ndarray     # int64 masks, strictly ascending
    offsets: np.ndarray    # per high-half value: index of its first state
    low_rank: np.ndarray   # per low-half value: rank among equal-popcount masks
    low_bits: int

    @property
    def dim(self) -> int:
        return int(self.states.shape[0])

    def __repr__(self) -> str:
        return f"SectorBasis(L={self.L}, n_up={self.n_up}, dim={self.dim})"


def _rank_tables(L: int, n_up: int):
    low_bits = L // 2
    high_bits = L - low_bits
    high = np.arange(1 << high_bits, dtype=np.int64)
    k_low = n_up - kernels.popcount(high)
    ok = (k_low >= 0) & (k_low <= low_bits)
    counts = np.where(ok, BINOM[low_bits, np.clip(k_low, 0, low_bits)], 0)
    offsets = np.cumsum(counts) - counts

    low = np.arange(1 << low_bits, dtype=np.int64)
    low_rank = np.zeros(1 << low_bits, dtype=np.int64)
    nth_bit = np.zeros(1 << low_bits, dtype=np.int64)
    for p in range(low_bits):
        bit = (low >> p) & 1
        nth_bit += bit
        low_rank += np.where(bit == 1, BINOM[p, nth_bit], 0)
    return offsets, low_rank, low_bits


def build_sector_basis(L: int, n_up: int) -> SectorBasis:
    """Enumerate the full (L, n_up) sector, ascending, with O(1) rank tables."""
    if L % 2 != 0:
        raise ValueError(f"L must be even, got {L}")
    if not 4 <= L <= MAX_SITES:
        raise ValueError(f"L must be in [4, {MAX_SITES}], got {L}")
    if not 0 <= n_up <= L:
        raise ValueError(f"n_up must be in [0, {L}], got {n_up}")

    dim = math.comb(L, n_up)
    states = kernels.fill_states(L, n_up, dim)
    offsets, low_rank, low_bits = _rank_tables(L, n_up)
    for arr in (states, offsets, low_rank):
        arr.setflags(write=False)
    return SectorBasis(L=L, n_up=n_up, states=states,
                       offsets=offsets, low_rank=low_rank, low_bits=low_bits)


def rank(basis: SectorBasis, mask: int) -> int:
    """Index of ``mask`` in ``basis.states``; inverse of :func:`unrank`."""
    mask = int(mask)
    if mask < 0 or mask >> basis.L:
        raise ValueError(f"mask {mask:#x} has bits outside the {basis.L} sites")
    if mask.bit_count() != basis.n_up:
        raise ValueError(
            f"mask {mask:0{basis.L}b} has popcount {mask.bit_count()}, sector needs {basis.n_up}")
    low_mask = (1 << basis.low_bits) - 1
    return int(basis.offsets[mask >> basis.low_bits] + basis.low_rank[mask & low_mask])


def unrank(basis: SectorBasis, index: int) -> int:
    """The ``index``-th mask of the sector (ascending order)."""
    if not 0 <= index < basis.dim:
        raise IndexError(f"index {index} outside [0, {basis.dim})")
    return int(basis.states[index])
