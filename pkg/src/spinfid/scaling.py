"""Peak location and finite-size extrapolation of the transition point.

``find_peak`` picks the interior maximum of a column, requires a minimum
prominence over the higher of the two flanking minima, and refines the
position with the vertex of the parabola through the peak and its
neighbors.  ``extrapolate`` fits the peak positions linearly in 1/L or
1/L^2 and reads the transition point off the intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCALING_VARIABLES = ("inv_L", "inv_L2")


@dataclass(frozen=True)
class PeakRecord:
    L: int
    lambda_peak: float
    peak_value: float
    grid_index: int
    refinement_offset: float


@dataclass(frozen=True)
class ScalingResult:
    variable: str
    points: tuple[PeakRecord, ...]
    slope: float
    lambda_c: float
    intercept_std_error: float
    r_squared: float


def find_peak(lams, ys, min_prominence: float, L: int = 0) -> PeakRecord | None:
    """Most prominent interior maximum of (lams, ys), parabola-refined.

    ``min_prominence`` is an absolute height above the higher of the two
    flanking minima.  Returns None when no interior point qualifies.
    """
    x = np.asarray(lams, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("lams and ys must be 1-d sequences of equal length")
    if x.size < 5:
        raise ValueError(f"need at least 5 grid points, got {x.size}")
    if np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly ascending")

    i = 1 + int(np.argmax(y[1:-1]))
    prominence = y[i] - max(np.min(y[:i]), np.min(y[i + 1:]))
    if prominence < min_prominence:
        return None

    # vertex of the parabola through (x, y) at i-1, i, i+1
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    peak_x = x1 if a == 0 else -b / (2 * a)
    if not x0 < peak_x < x2:  # degenerate neighbors; keep the grid point
        peak_x = x1
    return PeakRecord(L=L, lambda_peak=float(peak_x), peak_value=float(y1),
                      grid_index=i, refinement_offset=float(peak_x - x1))


def extrapolate(peaks, variable: str = "inv_L") -> ScalingResult:
    """OLS fit of lambda_peak against 1/L (or 1/L^2); intercept = lambda_c."""
    if variable not in SCALING_VARIABLES:
        raise ValueError(f"variable must be one of {SCALING_VARIABLES}, got {variable!r}")
    peaks = tuple(peaks)
    if len(peaks) < 3:
        raise ValueError(f"need at least 3 peaks to extrapolate, got {len(peaks)}")
    Ls = np.array([p.L for p in peaks], dtype=np.float64)
    if len(set(Ls.tolist())) != len(peaks):
        raise ValueError("duplicate system sizes give identical abscissas")
    x = 1.0 / Ls if variable == "inv_L" else 1.0 / Ls**2
    y = np.array([p.lambda_peak for p in peaks])

    n = x.size
    xbar = x.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    ssr = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    if n > 2:
        s2 = ssr / (n - 2)
        stderr = float(np.sqrt(s2 * (1.0 / n + xbar**2 / sxx)))
    else:
        stderr = float("nan")
    order = np.argsort(-Ls)  # store largest systems first
    return ScalingResult(variable=variable,
                         points=tuple(peaks[int(i)] for i in order),
                         slope=slope, lambda_c=intercept,
                         intercept_std_error=stderr, r_squared=r2)
