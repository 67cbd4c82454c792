"""Extremal eigensolvers and eigenvector gauge fixing.

The iterative path is a thick-restart Lanczos loop whose Krylov basis is
kept fully orthonormal (two Gram-Schmidt passes per step), so the small
projected matrix can be treated as dense and restarts reduce to keeping a
few Ritz vectors plus the continuation direction.  Convergence is judged
on the explicitly recomputed residual norm ||H v - E v||, never on
eigenvalue stagnation.

The gap to the first excited state comes from a second, cheaper run on
the complement of the converged ground vector (deflation), which also
resolves exact ground-state degeneracies that a single-vector Krylov
space cannot see.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .basis import SectorBasis
from .hamiltonian import ChainSpec, dense_hamiltonian, matvec_factory

FULL_SPECTRUM_DIM_MAX = 4000
NEAR_DEGENERACY_RTOL = 1e-10
GAUGE_TOL = 1e-12


class NonConvergedError(RuntimeError):
    """Iterative solve ran out of budget; carries the best-so-far solution."""

    def __init__(self, solution: "GroundStateSolution"):
        super().__init__(
            f"no convergence after {solution.iterations} matvecs "
            f"(residual {solution.residual_norm:.3e})")
        self.solution = solution


class GaugeUndefinedError(ValueError):
    """Reference overlap vanishes; the sign convention signals a level crossing."""


@dataclass(eq=False)
class GroundStateSolution:
    """Converged extremal eigenpair with gap estimate and convergence metadata."""

    lam: float
    energy: float
    second_energy: float
    vector: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    seed: int
    near_degenerate: bool = False
    gap_converged: bool = True
    excited_vector: np.ndarray | None = field(default=None, repr=False)

    @property
    def gap(self) -> float:
        return self.second_energy - self.energy


@dataclass(eq=False)
class SpectralData:
    """Full ascending spectrum of one sector (dense oracle support)."""

    energies: np.ndarray
    eigenvectors: np.ndarray  # column n is the n-th eigenvector
    lam: float
    basis: SectorBasis | None = None


def _default_ncv(dim: int) -> int:
    if dim <= 1_000_000:
        return 64
    if dim <= 3_000_000:
        return 40
    return 24


def _project_out(w: np.ndarray, deflate: np.ndarray | None) -> None:
    if deflate is not None:
        w -= deflate.T @ (deflate @ w)


def _lowest_in_subspace(matvec, dim, start, *, tol, budget, ncv, n_keep,
                        deflate, rng):
    """Lowest eigenpair of the operator restricted to the complement of
    ``deflate``.  Returns (energy, vector, residual, matvecs, converged)."""
    n_defl = 0 if deflate is None else deflate.shape[0]
    eff_dim = dim - n_defl
    ncv = max(2, min(ncv, eff_dim))

    v = np.array(start, dtype=np.float64, copy=True)
    _project_out(v, deflate)
    nrm = np.linalg.norm(v)
    for _ in range(20):
        if nrm > 1e-8:
            break
        v = rng.random(dim) - 0.5
        _project_out(v, deflate)
        nrm = np.linalg.norm(v)
    else:
        raise RuntimeError("no start vector outside the deflation set")
    v /= nrm

    V = np.empty((ncv, dim))
    T = np.zeros((ncv, ncv))
    V[0] = v
    j = 1
    nmv = 0
    best = (np.inf, v, np.inf)  # (energy, vector, residual)

    def verify(S0):
        """Form the lowest Ritz vector and measure its true residual."""
        nonlocal nmv, best
        y = V[:j].T @ S0
        y /= np.linalg.norm(y)
        Ay = matvec(y)
        nmv += 1
        _project_out(Ay, deflate)
        energy = float(y @ Ay)
        r = Ay - energy * y
        res = float(np.linalg.norm(r))
        if res < best[2]:
            best = (energy, y, res)
        return energy, y, r, res

    while True:
        w = matvec(V[j - 1])
        nmv += 1
        _project_out(w, deflate)
        c = V[:j] @ w
        w -= V[:j].T @ c
        c2 = V[:j] @ w
        w -= V[:j].T @ c2
        col = c + c2
        T[:j, j - 1] = col
        T[j - 1, :j] = col
        beta = float(np.linalg.norm(w))

        theta, S = sla.eigh(T[:j, :j])
        res_est = beta * abs(S[j - 1, 0])
        scale = max(1.0, float(abs(theta).max()))

        if res_est <= 0.8 * tol or j >= eff_dim:
            energy, y, r, res = verify(S[:, 0])
            if res <= tol or j >= eff_dim:
                return energy, y, res, nmv, res <= tol
            # estimate was optimistic: restart from the pair and its residual
            r -= y * float(y @ r)
            _project_out(r, deflate)
            rnorm = float(np.linalg.norm(r))
            V[0] = y
            T.fill(0.0)
            T[0, 0] = energy
            if rnorm > 1e-13 * scale:
                V[1] = r / rnorm
                T[1, 0] = T[0, 1] = rnorm
                j = 2
            else:
                j = 1
            continue

        if nmv >= budget:
            energy, y, r, res = verify(S[:, 0])
            if res <= tol:
                return energy, y, res, nmv, True
            return best[0], best[1], best[2], nmv, False

        if beta <= 1e-13 * scale:
            # invariant subspace hit before convergence: inject a fresh direction
            w = rng.random(dim) - 0.5
            _project_out(w, deflate)
            w -= V[:j].T @ (V[:j] @ w)
            w -= V[:j].T @ (V[:j] @ w)
            bnorm = float(np.linalg.norm(w))
            if bnorm < 1e-10:
                energy, y, r, res = verify(S[:, 0])
                return energy, y, res, nmv, res <= tol
            V[j] = w / bnorm
            # true coupling of the injected direction is zero
            T[j, j - 1] = T[j - 1, j] = 0.0
            j += 1
            continue

        if j == ncv:
            nk = min(n_keep, j - 1)
            Y = V[:j].T @ S[:, :nk]
            b = beta * S[j - 1, :nk]
            V[:nk] = Y.T
            V[nk] = w / beta
            T.fill(0.0)
            T[:nk, :nk] = np.diag(theta[:nk])
            T[nk, :nk] = b
            T[:nk, nk] = b
            j = nk + 1
            continue

        V[j] = w / beta
        T[j, j - 1] = T[j - 1, j] = beta
        j += 1


def ground_state(matvec, dim: int, *, tol: float = 1e-12, max_iter: int = 20000,
                 seed: int = 1, v0: np.ndarray | None = None,
                 v1: np.ndarray | None = None, ncv: int | None = None,
                 n_keep: int = 8, tol_excited: float = 1e-7,
                 lam: float = float("nan")) -> GroundStateSolution:
    """Lowest eigenpair of a symmetric operator given as a matvec closure.

    ``v0``/``v1`` warm-start the ground and gap-probe runs; without them the
    start vectors are seeded uniform random.  Raises :class:`NonConvergedError`
    when the ground pair misses ``tol`` within ``max_iter`` matvecs.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    ncv = ncv if ncv is not None else _default_ncv(dim)

    start = v0 if v0 is not None else rng.random(dim) - 0.5
    e0, y0, res0, nmv0, ok0 = _lowest_in_subspace(
        matvec, dim, start, tol=tol, budget=max_iter, ncv=ncv, n_keep=n_keep,
        deflate=None, rng=rng)
    if not ok0:
        raise NonConvergedError(GroundStateSolution(
            lam=lam, energy=e0, second_energy=e0, vector=y0, residual_norm=res0,
            iterations=nmv0, converged=False, seed=seed))

    start1 = v1 if v1 is not None else rng.random(dim) - 0.5
    budget1 = max(500, max_iter - nmv0)
    e1, y1, res1, nmv1, ok1 = _lowest_in_subspace(
        matvec, dim, start1, tol=tol_excited, budget=budget1, ncv=ncv,
        n_keep=n_keep, deflate=y0[None, :], rng=rng)
    e1 = max(e1, e0)

    return GroundStateSolution(
        lam=lam, energy=e0, second_energy=e1, vector=y0, residual_norm=res0,
        iterations=nmv0 + nmv1, converged=True, seed=seed,
        near_degenerate=(e1 - e0) < NEAR_DEGENERACY_RTOL * max(1.0, abs(e0)),
        gap_converged=ok1, excited_vector=y1)


def lowest_eigenpairs(matvec, dim: int, k: int = 2, *, tol: float = 1e-12,
                      max_iter: int = 20000, seed: int = 1,
                      ncv: int | None = None):
    """The k lowest eigenpairs via successive deflation (test utility)."""
    rng = np.random.default_rng(seed)
    ncv = ncv if ncv is not None else _default_ncv(dim)
    energies = []
    vectors = []
    for _ in range(k):
        deflate = np.array(vectors) if vectors else None
        e, y, res, nmv, ok = _lowest_in_subspace(
            matvec, dim, rng.random(dim) - 0.5, tol=tol, budget=max_iter,
            ncv=ncv, n_keep=8, deflate=deflate, rng=rng)
        if not ok:
            raise NonConvergedError(GroundStateSolution(
                lam=float("nan"), energy=e, second_energy=e, vector=y,
                residual_norm=res, iterations=nmv, converged=False, seed=seed))
        energies.append(e)
        vectors.append(y)
    return np.array(energies), np.array(vectors)


def full_spectrum(dense: np.ndarray, *, lam: float = float("nan"),
                  basis: SectorBasis | None = None) -> SpectralData:
    """All eigenpairs of a dense symmetric sector matrix, ascending."""
    dense = np.asarray(dense)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {dense.shape}")
    if dense.shape[0] > FULL_SPECTRUM_DIM_MAX:
        raise ValueError(
            f"full spectrum limited to dim <= {FULL_SPECTRUM_DIM_MAX}, got {dense.shape[0]}")
    energies, vectors = sla.eigh(dense)
    return SpectralData(energies=energies, eigenvectors=vectors, lam=lam, basis=basis)


def gauge_fix(v: np.ndarray, reference: np.ndarray | None = None) -> np.ndarray:
    """Fix the overall sign of a real eigenvector.

    With a reference: flip so the overlap is positive; a vanishing overlap
    (|<ref|v>| <= 1e-12) raises :class:`GaugeUndefinedError`.  Without one:
    flip so the largest-magnitude amplitude (lowest index on ties) is
    positive.
    """
    if reference is not None:
        if reference.shape != v.shape:
            raise ValueError("reference and vector lengths differ")
        ov = float(reference @ v)
        if abs(ov) <= GAUGE_TOL:
            raise GaugeUndefinedError(
                f"reference overlap {ov:.3e} is below {GAUGE_TOL}; gauge undefined")
        return v if ov > 0 else -v
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


class LanczosSolver:
    """Callable lam -> GroundStateSolution over one sector, warm-startable."""

    def __init__(self, basis: SectorBasis, *, tol: float = 1e-12, seed: int = 1,
                 max_iter: int = 20000, ncv: int | None = None,
                 tol_excited: float = 1e-7):
        self.basis = basis
        self.tol = tol
        self.seed = seed
        self.max_iter = max_iter
        self.ncv = ncv
        self.tol_excited = tol_excited

    def __call__(self, lam: float, warm: GroundStateSolution | None = None) -> GroundStateSolution:
        mv = matvec_factory(self.basis, lam)
        return ground_state(
            mv, self.basis.dim, tol=self.tol, max_iter=self.max_iter,
            seed=self.seed, ncv=self.ncv, tol_excited=self.tol_excited, lam=lam,
            v0=None if warm is None else warm.vector,
            v1=None if warm is None else warm.excited_vector)


class DenseSolver:
    """Dense-diagonalization stand-in for LanczosSolver at oracle sizes."""

    def __init__(self, basis: SectorBasis, *, seed: int = 0):
        self.basis = basis
        self.seed = seed

    def __call__(self, lam: float, warm: GroundStateSolution | None = None) -> GroundStateSolution:
        H = dense_hamiltonian(ChainSpec(L=self.basis.L, lam=lam), self.basis)
        w, U = sla.eigh(H, subset_by_index=(0, 1))
        v = np.ascontiguousarray(U[:, 0])
        v /= np.linalg.norm(v)
        res = float(np.linalg.norm(H @ v - w[0] * v))
        return GroundStateSolution(
            lam=lam, energy=float(w[0]), second_energy=float(w[1]), vector=v,
            residual_norm=res, iterations=0, converged=True, seed=self.seed,
            near_degenerate=(w[1] - w[0]) < NEAR_DEGENERACY_RTOL * max(1.0, abs(w[0])),
            gap_converged=True, excited_vector=np.ascontiguousarray(U[:, 1]))


def make_solver(basis: SectorBasis, kind: str = "lanczos", **opts):
    if kind == "lanczos":
        return LanczosSolver(basis, **opts)
    if kind == "dense":
        opts.pop("tol", None)
        opts.pop("max_iter", None)
        opts.pop("tol_excited", None)
        return DenseSolver(basis, **opts)
    raise ValueError(f"unknown solver kind {kind!r}")
