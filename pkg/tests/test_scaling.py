import numpy as np
import pytest

from spinfid import PeakRecord, extrapolate, find_peak


def parabola_column(center=0.25, width=0.1):
    lams = np.arange(0.0, 0.5001, 0.01)
    ys = 1.0 - ((lams - center) / width) ** 2
    return lams, ys


def test_parabola_vertex_recovered_exactly():
    lams, ys = parabola_column(center=0.253)  # off-grid vertex
    rec = find_peak(lams, ys, 0.0)
    assert rec is not None
    assert rec.lambda_peak == pytest.approx(0.253, abs=1e-12)
    assert abs(rec.refinement_offset) <= 0.01
    assert lams[0] < rec.lambda_peak < lams[-1]


def test_scaling_invariance_of_position():
    lams, ys = parabola_column(center=0.31)
    a = find_peak(lams, ys, 0.0)
    b = find_peak(lams, 37.5 * ys, 0.0)
    assert a.lambda_peak == pytest.approx(b.lambda_peak, abs=1e-14)
    assert a.grid_index == b.grid_index


def test_monotone_has_no_peak():
    lams = np.linspace(0.0, 0.5, 26)
    assert find_peak(lams, np.exp(lams), 0.0) is None
    assert find_peak(lams, -lams, 0.0) is None


def test_prominence_gate():
    lams = np.linspace(0.0, 0.5, 26)
    ys = np.zeros(26)
    ys[0] = 1.0    # boundary spike sets the column range but is not interior
    ys[10] = 0.004  # tiny interior bump
    rng_span = ys.max() - ys.min()
    assert find_peak(lams, ys, 0.02 * rng_span) is None
    assert find_peak(lams, ys, 0.001 * rng_span) is not None


def test_find_peak_validation():
    with pytest.raises(ValueError):
        find_peak([0.0, 0.1, 0.2, 0.3], [1, 2, 1, 0], 0.0)  # too short
    with pytest.raises(ValueError):
        find_peak([0.0, 0.2, 0.1, 0.3, 0.4], [1, 2, 3, 2, 1], 0.0)  # unsorted


def exact_line_peaks(lambda_c=0.24, slope=0.5):
    return [PeakRecord(L=L, lambda_peak=lambda_c + slope / L, peak_value=1.0,
                       grid_index=0, refinement_offset=0.0)
            for L in (14, 16, 18, 20)]


def test_exact_linear_extrapolation():
    fit = extrapolate(exact_line_peaks(), "inv_L")
    assert fit.lambda_c == pytest.approx(0.24, abs=1e-12)
    assert fit.slope == pytest.approx(0.5, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_extrapolation_order_invariant():
    peaks = exact_line_peaks()
    a = extrapolate(peaks, "inv_L")
    b = extrapolate(list(reversed(peaks)), "inv_L")
    assert a.lambda_c == b.lambda_c
    assert a.slope == b.slope


def test_inv_l2_variable():
    peaks = [PeakRecord(L=L, lambda_peak=0.3 + 2.0 / L**2, peak_value=1.0,
                        grid_index=0, refinement_offset=0.0)
             for L in (14, 18, 22)]
    fit = extrapolate(peaks, "inv_L2")
    assert fit.lambda_c == pytest.approx(0.3, abs=1e-12)


def test_noisy_fit_has_positive_stderr(rng):
    peaks = [PeakRecord(L=L, lambda_peak=0.24 + 0.5 / L + 1e-3 * rng.standard_normal(),
                        peak_value=1.0, grid_index=0, refinement_offset=0.0)
             for L in (12, 14, 16, 18, 20)]
    fit = extrapolate(peaks, "inv_L")
    assert fit.intercept_std_error > 0.0
    assert fit.r_squared < 1.0


def test_extrapolate_validation():
    peaks = exact_line_peaks()
    with pytest.raises(ValueError):
        extrapolate(peaks[:2], "inv_L")
    dup = peaks + [peaks[0]]
    with pytest.raises(ValueError):
        extrapolate(dup, "inv_L")
    with pytest.raises(ValueError):
        extrapolate(peaks, "inv_L3")
