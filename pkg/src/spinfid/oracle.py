"""Exact small-L spectral sums: the ground truth for the fidelity engine.

Given the full spectrum of one sector, the driving-operator matrix elements
M[m, n] = <m|H_I|n> feed closed-form sums for the second- and third-order
overlap coefficients and for the third energy derivative.  A plain
finite-difference third derivative of the ground energy closes the loop
from the other side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SectorBasis
from .eigensolver import NEAR_DEGENERACY_RTOL, SpectralData
from .hamiltonian import ChainSpec, apply_driving


class DegenerateGroundStateError(ValueError):
    """Spectral sums are ill-defined when the ground state is degenerate."""


@dataclass(eq=False)
class DrivingMatrixElements:
    """<m|H_I|n> over all eigenpairs of one sector spectrum."""

    elements: np.ndarray
    lam: float


def driving_elements(spectral: SpectralData, basis: SectorBasis) -> DrivingMatrixElements:
    """Apply H_I to every eigenvector and project back onto the eigenbasis."""
    V = spectral.eigenvectors
    spec = ChainSpec(L=basis.L, lam=0.0)
    W = np.empty_like(V)
    for n in range(V.shape[1]):
        W[:, n] = apply_driving(spec, basis, V[:, n])
    return DrivingMatrixElements(elements=V.T @ W, lam=spectral.lam)


def _split(elems: DrivingMatrixElements | np.ndarray, energies: np.ndarray):
    M = elems.elements if isinstance(elems, DrivingMatrixElements) else np.asarray(elems)
    E = np.asarray(energies, dtype=np.float64)
    if M.shape != (E.size, E.size):
        raise ValueError(f"element matrix {M.shape} does not match {E.size} energies")
    if E.size >= 2 and (E[1] - E[0]) < NEAR_DEGENERACY_RTOL * max(1.0, abs(E[0])):
        raise DegenerateGroundStateError(
            f"gap {E[1] - E[0]:.3e} at E0 = {E[0]:.6f}")
    d = E[0] - E[1:]          # strictly negative
    w = M[0, 1:]              # couplings to the ground state
    return M, d, w


def chi2_perturbative(elems, energies) -> float:
    """Second-order overlap coefficient: sum_n |<n|H_I|0>|^2 / (E0-En)^2."""
    _, d, w = _split(elems, energies)
    return float(np.sum((w / d) ** 2))


def chi3_perturbative(elems, energies) -> float:
    """Third-order overlap coefficient from the double spectral sum."""
    M, d, w = _split(elems, energies)
    a = w / d
    b = w / d**2
    return float(2.0 * a @ M[1:, 1:] @ b - 2.0 * M[0, 0] * np.sum(w**2 / d**3))


def d3E_perturbative(elems, energies) -> float:
    """Third derivative of the ground energy from the double spectral sum."""
    M, d, w = _split(elems, energies)
    a = w / d
    return float(6.0 * a @ M[1:, 1:] @ a - 6.0 * M[0, 0] * np.sum((w / d) ** 2))


def d3E_finite_difference(solve, lam: float, h: float = 1e-2) -> float:
    """Central third difference of E0 over the 5-point stencil lam + k*h."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    sols = {}
    for k in (0, 1, 2, -1, -2):
        warm = None if k == 0 else sols[k - 1 if k > 0 else k + 1]
        sols[k] = solve(lam + k * h, warm=warm)
    e = {k: sols[k].energy for k in sols}
    return (e[2] - 2.0 * e[1] + 2.0 * e[-1] - e[-2]) / (2.0 * h**3)
