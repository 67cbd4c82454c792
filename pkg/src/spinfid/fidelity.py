"""Ground-state overlap fidelity and its expansion coefficients.

Two independent routes extract the second- and third-order coefficients of
F^2(lam, d) = 1 - sum_l d^l chi_l from ground states on a small stencil
around lam:

* ``chi_from_stencil``   -- exact quartic fit of F^2 - 1 on offsets
  {+-s, +-2s}; the coefficient of d^1 is kept as a diagnostic (it must
  vanish) and the d^4 term absorbs truncation bias.
* ``chi_from_derivatives`` -- central-difference derivative vectors of the
  gauge-fixed ground state, combined through the projector 1 - |0><0|.

Both routes self-check by repeating at half the step and accepting the
point only when chi2 agrees to 0.5% and chi3 to 2%; one further halving is
tried before the point is flagged.  ``sweep`` drives either route over an
(L, lam) grid with warm-started solves and deterministic row order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .basis import SectorBasis, build_sector_basis
from .eigensolver import (GaugeUndefinedError, GroundStateSolution,
                          NonConvergedError, gauge_fix, make_solver)

WORKERS_ENV = "SPINFID_WORKERS"
LAMBDA_MAX = 0.6
CHI2_AGREE_RTOL = 0.005
CHI3_AGREE_RTOL = 0.02


class RefusedPointError(RuntimeError):
    """A stencil point was refused: degeneracy or level crossing inside it."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}{': ' + detail if detail else ''}")
        self.reason = reason


def overlap_fidelity(v1: np.ndarray, v2: np.ndarray) -> float:
    """F = |<v1|v2>| for normalized vectors on the same basis."""
    if v1.shape != v2.shape:
        raise ValueError(f"basis mismatch: {v1.shape} vs {v2.shape}")
    return min(abs(float(v1 @ v2)), 1.0)


@dataclass(eq=False)
class ExpansionPoint:
    """Per-lambda record of fidelity values and expansion coefficients."""

    lam: float
    h: float
    F_values: dict[float, float]
    chi2: float
    chi3: float
    chi4_nuisance: float
    linear_coeff: float
    fit_residual: float
    method: str
    gap_at_lambda: float
    flag: str = ""
    center: GroundStateSolution | None = field(default=None, repr=False)


class _OffsetSolves:
    """Ground states at lam + offset, warm-chained outward from the center."""

    def __init__(self, solve, lam: float, warm_center=None):
        self.solve = solve
        self.lam = lam
        self.warm_center = warm_center
        self.sols: dict[float, GroundStateSolution] = {}

    def get(self, offset: float) -> GroundStateSolution:
        if offset in self.sols:
            return self.sols[offset]
        if offset == 0.0:
            warm = self.warm_center
        else:
            cands = [o for o in self.sols
                     if o == 0.0 or (o > 0) == (offset > 0)]
            near = min(cands, key=lambda o: (abs(o - offset), abs(o)))
            warm = self.sols[near]
        sol = self.solve(self.lam + offset, warm=warm)
        if sol.near_degenerate:
            raise RefusedPointError(
                "near_degenerate",
                f"gap {sol.gap:.3e} at lambda = {self.lam + offset:.6g}")
        self.sols[offset] = sol
        return sol


def _agree(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-12)


def _step_ladder(fit, h, richardson, chi2_rtol, chi3_rtol):
    """Run fit(s) at h (and h/2, h/4 as needed); return (fit, step, flag)."""
    base = fit(h)
    if not richardson:
        return base, h, ""
    half = fit(h / 2)
    if _agree(base[0], half[0], chi2_rtol) and _agree(base[1], half[1], chi3_rtol):
        return base, h, ""
    quarter = fit(h / 4)
    if _agree(half[0], quarter[0], chi2_rtol) and _agree(half[1], quarter[1], chi3_rtol):
        return half, h / 2, ""
    return half, h / 2, "h_unconverged"


def chi_from_stencil(solve, lam: float, h: float, *, richardson: bool = True,
                     chi2_rtol: float = CHI2_AGREE_RTOL,
                     chi3_rtol: float = CHI3_AGREE_RTOL,
                     warm_center=None) -> ExpansionPoint:
    """chi2/chi3 from a quartic fit of F^2 - 1 on the offsets {+-s, +-2s}."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    run = _OffsetSolves(solve, lam, warm_center)
    center = run.get(0.0)
    F_seen: dict[float, float] = {}

    def F(offset: float) -> float:
        if offset not in F_seen:
            F_seen[offset] = overlap_fidelity(center.vector, run.get(offset).vector)
        return F_seen[offset]

    def fit(s: float):
        ks = np.array([-2.0, -1.0, 1.0, 2.0])
        for k in (1.0, 2.0, -1.0, -2.0):  # fixed solve order: outward, + then -
            F(k * s)
        y = np.array([F(k * s) ** 2 - 1.0 for k in ks])
        M = np.column_stack([ks, ks**2, ks**3, ks**4])  # scaled variable t = d/s
        cs = np.linalg.solve(M, y)
        resid = float(np.max(np.abs(M @ cs - y)))
        c = cs / s ** np.arange(1, 5)
        return -c[1], -c[2], c[0], -c[3], resid

    (chi2, chi3, lin, chi4, resid), step, flag = _step_ladder(
        fit, h, richardson, chi2_rtol, chi3_rtol)
    return ExpansionPoint(
        lam=lam, h=step, F_values=dict(F_seen), chi2=chi2, chi3=chi3,
        chi4_nuisance=chi4, linear_coeff=lin, fit_residual=resid,
        method="stencil", gap_at_lambda=center.gap, flag=flag, center=center)


def chi_from_derivatives(solve, lam: float, h: float, *, richardson: bool = True,
                         chi2_rtol: float = CHI2_AGREE_RTOL,
                         chi3_rtol: float = CHI3_AGREE_RTOL,
                         warm_center=None) -> ExpansionPoint:
    """chi2/chi3 from projected finite-difference derivative vectors."""
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    run = _OffsetSolves(solve, lam, warm_center)
    center = run.get(0.0)
    v0 = center.vector
    F_seen: dict[float, float] = {}

    def fixed(offset: float) -> np.ndarray:
        sol = run.get(offset)
        F_seen.setdefault(offset, overlap_fidelity(v0, sol.vector))
        try:
            return gauge_fix(sol.vector, v0)
        except GaugeUndefinedError as e:
            raise RefusedPointError("level_crossing", str(e)) from e

    def fit(s: float):
        vp = fixed(s)
        vm = fixed(-s)
        d1 = (vp - vm) / (2.0 * s)
        d2 = (vp - 2.0 * v0 + vm) / s**2
        pd1 = d1 - v0 * float(v0 @ d1)
        pd2 = d2 - v0 * float(v0 @ d2)
        chi2 = float(d1 @ pd1)
        chi3 = 0.5 * (float(d1 @ pd2) + float(d2 @ pd1))
        lin = 2.0 * float(v0 @ d1)
        return chi2, chi3, lin

    (chi2, chi3, lin), step, flag = _step_ladder(
        fit, h, richardson, chi2_rtol, chi3_rtol)
    return ExpansionPoint(
        lam=lam, h=step, F_values=dict(F_seen), chi2=chi2, chi3=chi3,
        chi4_nuisance=0.0, linear_coeff=lin, fit_residual=0.0,
        method="derivative", gap_at_lambda=center.gap, flag=flag, center=center)


# ---------------------------------------------------------------------------
# sweep orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaGrid:
    lo: float
    hi: float
    step: float

    def values(self) -> list[float]:
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.hi < self.lo:
            return []
        n = int(math.floor((self.hi - self.lo) / self.step + 1.0 + 1e-9))
        return [self.lo + i * self.step for i in range(n)]


@dataclass
class SweepOptions:
    h: float = 1e-3
    method: str = "stencil"      # stencil | derivative | both
    seed: int = 1
    tol: float = 1e-12
    richardson: bool = True
    solver: str = "lanczos"      # lanczos | dense
    workers: int | None = None
    max_iter: int = 20000


@dataclass
class SweepRow:
    """One CSV row of a sweep; field order is the on-disk column order."""

    L: int
    lam: float
    energy: float
    gap: float
    F_plus_h: float
    chi2: float
    chi3: float
    chi3_abs: float
    fit_residual: float
    flag: str


@dataclass
class PointMeta:
    L: int
    lam: float
    seconds: float
    iterations: int
    flag: str
    h_used: float
    method: str
    chi2_alt: float | None = None
    chi3_alt: float | None = None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    meta: list[PointMeta]


def resolve_workers(requested: int | None = None) -> int:
    if requested is not None:
        if requested < 1:
            raise ValueError(f"workers must be >= 1, got {requested}")
        return requested
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1, got {env}")
        return n
    return os.cpu_count() or 1


def _memoized(solve):
    cache: dict[float, GroundStateSolution] = {}

    def wrapped(lam, warm=None):
        if lam not in cache:
            cache[lam] = solve(lam, warm=warm)
        return cache[lam]

    wrapped.cache = cache
    return wrapped


def _sweep_point(solver, lam, opts, warm_center):
    """Compute one (L, lambda) point; returns (row fields, meta fields, center)."""
    memo = _memoized(solver)
    t0 = time.perf_counter()
    point = alt = None
    flag = ""
    try:
        if opts.method in ("stencil", "both"):
            point = chi_from_stencil(memo, lam, opts.h,
                                     richardson=opts.richardson,
                                     warm_center=warm_center)
        if opts.method in ("derivative", "both"):
            alt = chi_from_derivatives(memo, lam, opts.h,
                                       richardson=opts.richardson,
                                       warm_center=warm_center)
        if opts.method == "derivative":
            point, alt = alt, None
        flag = point.flag
        if alt is not None and not _agree(point.chi3, alt.chi3, CHI3_AGREE_RTOL):
            flag = f"{flag}+method_disagreement" if flag else "method_disagreement"
    except (RefusedPointError, NonConvergedError, GaugeUndefinedError) as err:
        reason = err.reason if isinstance(err, RefusedPointError) else "no_convergence"
        prefix = "refused" if isinstance(err, RefusedPointError) else "failed"
        flag = f"{prefix}:{reason}"
    seconds = time.perf_counter() - t0
    center = memo.cache.get(lam)
    iters = sum(s.iterations for s in memo.cache.values())

    energy = center.energy if center is not None else 0.0
    gap = center.gap if center is not None else 0.0
    if point is not None:
        row = SweepRow(L=0, lam=lam, energy=energy, gap=gap,
                       F_plus_h=point.F_values.get(opts.h, 0.0),
                       chi2=point.chi2, chi3=point.chi3,
                       chi3_abs=abs(point.chi3),
                       fit_residual=point.fit_residual, flag=flag)
        h_used, method = point.h, point.method
    else:
        row = SweepRow(L=0, lam=lam, energy=energy, gap=gap, F_plus_h=0.0,
                       chi2=0.0, chi3=0.0, chi3_abs=0.0, fit_residual=0.0,
                       flag=flag)
        h_used, method = opts.h, opts.method
    meta = PointMeta(L=0, lam=lam, seconds=seconds, iterations=iters,
                     flag=flag, h_used=h_used, method=method,
                     chi2_alt=None if alt is None else alt.chi2,
                     chi3_alt=None if alt is None else alt.chi3)
    return row, meta, center


def _chunk(values: list[float], n_chunks: int) -> list[list[float]]:
    n = len(values)
    if n == 0:
        return []
    n_chunks = max(1, min(n_chunks, n))
    bounds = [round(i * n / n_chunks) for i in range(n_chunks + 1)]
    return [values[bounds[i]:bounds[i + 1]] for i in range(n_chunks)
            if bounds[i] < bounds[i + 1]]


def sweep(sizes, grid: LambdaGrid, opts: SweepOptions | None = None) -> SweepResult:
    """Expansion coefficients for every (L, lambda) on the grid.

    Chunks of the lambda grid run as independent tasks (warm starts chain
    inside a chunk); rows come back in ascending (L, lambda) order whatever
    the completion order.  Per-point failures become flagged rows.
    """
    opts = opts or SweepOptions()
    sizes = sorted(set(int(L) for L in sizes))
    for L in sizes:
        if L % 2 != 0:
            raise ValueError(f"L must be even, got {L}")
    if opts.method not in ("stencil", "derivative", "both"):
        raise ValueError(f"unknown method {opts.method!r}")
    values = grid.values()
    if values:
        if grid.lo < 0.0 or grid.hi > LAMBDA_MAX:
            raise ValueError(f"lambda grid must lie within [0, {LAMBDA_MAX}]")
        if grid.step < 4 * opts.h:
            raise ValueError(
                f"grid step {grid.step} must be >= 4h = {4 * opts.h}")
    workers = resolve_workers(opts.workers)

    bases = {L: build_sector_basis(L, L // 2) for L in sizes}
    n_chunks = workers if len(values) >= 2 * workers else 1
    tasks = []
    for L in sizes:
        for ci, chunk in enumerate(_chunk(values, n_chunks)):
            tasks.append((L, ci, chunk))
    # heaviest sectors first so the pool drains evenly
    tasks.sort(key=lambda t: (-bases[t[0]].dim, t[0], t[1]))

    def run_task(task):
        L, ci, chunk = task
        solver = _make_point_solver(bases[L], opts)
        out = []
        prev_center = None
        for lam in chunk:
            row, meta, center = _sweep_point(solver, lam, opts, prev_center)
            row.L = L
            meta.L = L
            out.append((row, meta))
            if center is not None:
                prev_center = center
        return (L, ci), out

    results: dict[tuple[int, int], list] = {}
    if workers == 1 or len(tasks) == 1:
        for t in tasks:
            key, out = run_task(t)
            results[key] = out
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, out in pool.map(run_task, tasks):
                results[key] = out

    rows: list[SweepRow] = []
    meta: list[PointMeta] = []
    for L in sizes:
        for ci in range(n_chunks):
            for row, m in results.get((L, ci), []):
                rows.append(row)
                meta.append(m)
    return SweepResult(rows=rows, meta=meta)


def _make_point_solver(basis: SectorBasis, opts: SweepOptions):
    if opts.solver == "dense":
        return make_solver(basis, "dense", seed=opts.seed)
    return make_solver(basis, "lanczos", tol=opts.tol, seed=opts.seed,
                       max_iter=opts.max_iter)
