"""Matrix-free application of the frustrated Heisenberg chain.

H(lam) = sum_j s_j.s_{j+1} + lam * sum_j s_j.s_{j+2} with periodic site
indices (j runs over all L sites, so at L = 4 the two next-nearest
diagonals are each counted twice, exactly as the literal sum reads).
Each bond contributes s^z s^z on the diagonal and half a spin exchange
off the diagonal.

``dense_hamiltonian`` builds the same operator by an independent route
(per-bond numpy scatter with binary-search ranking) and is the oracle the
matvec kernels are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .basis import SectorBasis
from .kernels import MAX_SITES

DENSE_DIM_MAX = 4000


@dataclass(frozen=True)
class ChainSpec:
    """Chain geometry and coupling ratio; periodic is the only boundary."""

    L: int
    lam: float
    boundary: str = "periodic"

    def __post_init__(self):
        if self.L % 2 != 0 or not 4 <= self.L <= MAX_SITES:
            raise ValueError(f"L must be even and in [4, {MAX_SITES}], got {self.L}")
        if self.boundary != "periodic":
            raise ValueError(f"unsupported boundary {self.boundary!r}")


def _checked(basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (basis.dim,):
        raise ValueError(f"vector length {v.shape} does not match basis dim {basis.dim}")
    return np.ascontiguousarray(v)


def apply_bonds(basis: SectorBasis, c_nn: float, c_nnn: float, v: np.ndarray) -> np.ndarray:
    """(c_nn * H_nn + c_nnn * H_nnn) v via the active kernel backend."""
    v = _checked(basis, v)
    out = np.empty_like(v)
    kernels.apply_bonds(basis.states, basis.offsets, basis.low_rank,
                        basis.low_bits, basis.L, float(c_nn), float(c_nnn), v, out)
    return out


def apply_hamiltonian(spec: ChainSpec, basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    """H(lam) v."""
    if spec.L != basis.L:
        raise ValueError(f"spec L={spec.L} does not match basis L={basis.L}")
    return apply_bonds(basis, 1.0, spec.lam, v)


def apply_driving(spec: ChainSpec, basis: SectorBasis, v: np.ndarray) -> np.ndarray:
    """H_I v, the next-nearest-neighbor exchange alone."""
    if spec.L != basis.L:
        raise ValueError(f"spec L={spec.L} does not match basis L={basis.L}")
    return apply_bonds(basis, 0.0, 1.0, v)


def matvec_factory(basis: SectorBasis, lam: float):
    """Closure computing H(lam) v, for iterative solvers."""
    spec = ChainSpec(L=basis.L, lam=lam)

    def matvec(v: np.ndarray) -> np.ndarray:
        return apply_hamiltonian(spec, basis, v)

    return matvec


def dense_hamiltonian(spec: ChainSpec, basis: SectorBasis) -> np.ndarray:
    """Dense symmetric H(lam), built independently of the matvec kernels."""
    if spec.L != basis.L:
        raise ValueError(f"spec L={spec.L} does not match basis L={basis.L}")
    if basis.dim > DENSE_DIM_MAX:
        raise ValueError(f"dense builder limited to dim <= {DENSE_DIM_MAX}, got {basis.dim}")

    states = basis.states
    n = basis.dim
    L = basis.L
    H = np.zeros((n, n))
    rows = np.arange(n)
    diag = np.zeros(n)
    for dist, coup in ((1, 1.0), (2, spec.lam)):
        if coup == 0.0:
            continue
        for j in range(L):
            k = (j + dist) % L
            differ = ((states >> j) & 1) != ((states >> k) & 1)
            diag += np.where(differ, -0.25 * coup, 0.25 * coup)
            flipped = states[differ] ^ np.int64((1 << j) | (1 << k))
            cols = np.searchsorted(states, flipped)
            if not np.array_equal(states[cols], flipped):
                raise AssertionError("spin exchange left the Sz sector")
            H[rows[differ], cols] += 0.5 * coup
    H[rows, rows] += diag
    return H
