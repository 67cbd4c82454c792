"""Exact-diagonalization fidelity analysis of the frustrated spin-1/2 chain.

Computes ground-state overlap fidelity, its second-order coefficient (the
fidelity susceptibility) and third-order coefficient for the Heisenberg
chain with next-nearest-neighbor coupling, and locates the infinite-order
transition near lambda = 0.2411 by finite-size scaling of third-order
peaks.
"""

__version__ = "0.1.0"

from .basis import SectorBasis, build_sector_basis, rank, unrank
from .eigensolver import (DenseSolver, GaugeUndefinedError, GroundStateSolution,
                          LanczosSolver, NonConvergedError, SpectralData,
                          full_spectrum, gauge_fix, ground_state,
                          lowest_eigenpairs, make_solver)
from .fidelity import (ExpansionPoint, LambdaGrid, RefusedPointError,
                       SweepOptions, SweepResult, SweepRow, chi_from_derivatives,
                       chi_from_stencil, overlap_fidelity, sweep)
from .hamiltonian import (ChainSpec, apply_driving, apply_hamiltonian,
                          dense_hamiltonian, matvec_factory)
from .oracle import (DegenerateGroundStateError, DrivingMatrixElements,
                     chi2_perturbative, chi3_perturbative, d3E_finite_difference,
                     d3E_perturbative, driving_elements)
from .scaling import PeakRecord, ScalingResult, extrapolate, find_peak

__all__ = [
    "SectorBasis", "build_sector_basis", "rank", "unrank",
    "ChainSpec", "apply_hamiltonian", "apply_driving", "dense_hamiltonian",
    "matvec_factory",
    "GroundStateSolution", "SpectralData", "ground_state", "lowest_eigenpairs",
    "full_spectrum", "gauge_fix", "make_solver", "LanczosSolver", "DenseSolver",
    "NonConvergedError", "GaugeUndefinedError",
    "ExpansionPoint", "overlap_fidelity", "chi_from_stencil",
    "chi_from_derivatives", "sweep", "SweepOptions", "SweepResult", "SweepRow",
    "LambdaGrid", "RefusedPointError",
    "DrivingMatrixElements", "driving_elements", "chi2_perturbative",
    "chi3_perturbative", "d3E_perturbative", "d3E_finite_difference",
    "DegenerateGroundStateError",
    "PeakRecord", "ScalingResult", "find_peak", "extrapolate",
    "__version__",
]
