import math

import numpy as np
import pytest

from phasebench.extrapolation import (
    AccuracyCurve, FiniteSizeFit, SliceFit, SurfacePoint, ThresholdSurface, T_GRID, advantage_report,
    bootstrap_surface, crossings_many, fit_finite_size, forward_validation, select_slices,
    threshold_crossing, wls_inverse_size,
)

K = np.round(np.arange(0.5, 2.11, 0.1), 2)


def test_crossing_examples():
    c = threshold_crossing([1.0, 2.0], [0.5, 1.0], 0.75)
    assert c.ok and c.k == pytest.approx(1.5)
    assert threshold_crossing([1.0, 2.0], [0.8, 1.0], 0.75).censor == "left"
    assert threshold_crossing([1.0, 2.0], [0.5, 0.7], 0.75).censor == "right"
    # dip then rise: running maximum keeps the first crossing
    c = threshold_crossing([1, 2, 3, 4], [0.5, 0.8, 0.6, 0.9], 0.75)
    assert c.k == pytest.approx(1 + 0.25 / 0.3)
    with pytest.raises(ValueError):
        threshold_crossing([1, 2], [0.5, 1], 0.5)


def test_crossings_many_matches_scalar(gen):
    curves = np.sort(gen.uniform(0.4, 1.0, size=(50, K.size)), axis=1)
    curves[::7] = gen.uniform(0.4, 1.0, size=(8, K.size))[: curves[::7].shape[0]]
    kx = crossings_many(K, curves, T_GRID)
    for i in range(curves.shape[0]):
        for j, T in enumerate(T_GRID):
            c = threshold_crossing(K, curves[i], T)
            if c.ok:
                assert kx[i, j] == pytest.approx(c.k)
            else:
                assert np.isnan(kx[i, j])


def test_curve_validation():
    with pytest.raises(ValueError):
        AccuracyCurve([1.0, 1.0], [0.5, 0.6], 4)
    with pytest.raises(ValueError):
        AccuracyCurve([1.0, 2.0], [0.5, 1.2], 4)
    with pytest.raises(ValueError):
        AccuracyCurve([1.0, 2.0], [0.5, 0.6], 4, replicates=[[0.5, 0.6, 0.7]])


def _ramps(shifts, n_q=6):
    reps = np.clip(0.75 + (K[None, :] - np.asarray(shifts)[:, None]) / 8.0, 0.0, 1.0)
    return AccuracyCurve.from_replicates(K, reps, n_q)


def test_identical_replicates_zero_width():
    s = bootstrap_surface([_ramps([1.3] * 10)], [0.75], n_boot=200, rng=0)
    p = s.get(0.75, 6)
    assert p.k_med == pytest.approx(1.3) and p.sigma_k == pytest.approx(0.0, abs=1e-12)
    assert p.k_lo == pytest.approx(p.k_hi)


def test_bootstrap_recovers_known_sigma(gen):
    # mean-curve crossing of linear ramps is the mean shift, so its sd is exactly 0.05
    r = 20
    sig = []
    for rep in range(20):
        shifts = 1.3 + 0.05 * math.sqrt(r) * gen.standard_normal(r)
        sig.append(bootstrap_surface([_ramps(shifts)], [0.75], n_boot=1600, rng=rep).get(0.75, 6).sigma_k)
    # the bootstrap sd is a plug-in estimate, biased by sqrt((r-1)/r)
    assert np.mean(sig) == pytest.approx(0.05, rel=0.2)


def test_bootstrap_coverage(gen):
    r, hits = 20, 0
    for rep in range(200):
        shifts = 1.3 + 0.05 * math.sqrt(r) * gen.standard_normal(r)
        p = bootstrap_surface([_ramps(shifts)], [0.75], n_boot=1600, rng=rep).get(0.75, 6)
        hits += p.k_lo <= 1.3 <= p.k_hi
    assert hits / 200 >= 0.85


def test_bootstrap_requires_replicates():
    with pytest.raises(ValueError):
        bootstrap_surface([AccuracyCurve(K, np.linspace(0.5, 1, K.size), 4)])
    with pytest.raises(ValueError):
        bootstrap_surface([])


def _surface(fn, sizes, thresholds, sigma=0.01):
    pts = [SurfacePoint(float(T), n, fn(T, n), 0, 0, sigma, 100, None) for T in thresholds for n in sizes]
    return ThresholdSurface(pts, np.asarray(thresholds, dtype=float), list(sizes), 1.645, 100)


def test_fit_exact_recovery():
    surf = _surface(lambda T, n: 1.3 + 0.5 / n, [6, 8, 10, 12], [0.6, 0.7, 0.8])
    fit = fit_finite_size(surf)
    for s in fit.slices:
        assert abs(s.C - 1.3) < 1e-12 and abs(s.beta - 0.5) < 1e-12


def test_fit_interpolates_through_knots():
    surf = _surface(lambda T, n: T + (T ** 2) / n, [6, 8, 10, 12], [0.55, 0.65, 0.75, 0.85, 0.95])
    fit = fit_finite_size(surf)
    for s in fit.slices:
        assert fit.C(s.T) == pytest.approx(s.C, abs=1e-12)
        assert fit.beta(s.T) == pytest.approx(s.beta, abs=1e-12)
    assert fit.support == (0.55, 0.95)
    assert not fit.in_support(0.5)


def test_fit_needs_points():
    surf = _surface(lambda T, n: 1.0, [6, 8], [0.6])
    with pytest.raises(ValueError):
        fit_finite_size(surf)


def test_wls_beats_ols(gen):
    n = np.array([5, 6, 7, 8, 9, 10, 11, 12], dtype=float)
    sig = np.array([0.01, 0.01, 0.2, 0.01, 0.3, 0.01, 0.2, 0.01])
    err_w, err_o = [], []
    for _ in range(500):
        k = 1.3 + 0.5 / n + sig * gen.standard_normal(n.size)
        cw, bw, _ = wls_inverse_size(n, k, sig)
        co, bo, _ = wls_inverse_size(n, k, np.ones_like(sig))
        err_w.append((cw - 1.3) ** 2 + (bw - 0.5) ** 2)
        err_o.append((co - 1.3) ** 2 + (bo - 0.5) ** 2)
    assert np.mean(err_w) < np.mean(err_o)


def test_wls_sigma_floor():
    c, b, cov = wls_inverse_size([4, 6, 8], [1.5, 1.4, 1.35], [0, 0, 0])
    assert np.all(np.isfinite(cov))


def test_validation_consistent_data_trusted():
    T = [0.55, 0.63, 0.71, 0.79, 0.87]
    surf = _surface(lambda t, n: 1.0 + t + 0.5 / n, range(4, 11), T)
    v = forward_validation(surf)
    assert v.trusted, v.reasons
    assert v.n_hor == 45
    assert np.max(np.abs(v.residuals)) < 1e-10


def test_validation_slice_instability_fires():
    # with equal residual counts per slice the ratio is at most sqrt(#slices), so use 8
    T = [0.55, 0.59, 0.63, 0.67, 0.71, 0.75, 0.79, 0.87]

    def k(t, n):
        base = 1.0 + 0.5 / n
        return base + (40.0 / n ** 2 if t > 0.85 else 0.0)

    v = forward_validation(_surface(k, range(4, 11), T), slices=T)
    assert v.rmse_ratio > 2.5
    assert "slice instability" in v.reasons
    assert not v.trusted


def test_validation_insufficient_horizons():
    surf = _surface(lambda t, n: 1.0 + 0.5 / n, [4, 5, 6, 7], [0.55, 0.63, 0.71])
    v = forward_validation(surf)
    assert v.n_hor < 12 and "insufficient horizons" in v.reasons


def test_select_slices_percentiles():
    usable = [round(0.51 + 0.02 * i, 2) for i in range(11)]
    assert select_slices(usable) == [0.53, 0.57, 0.61, 0.65, 0.69]
    assert select_slices([0.6]) == [0.6]
    assert select_slices([]) == []


def _flat_fit(C=1.5, beta=0.0):
    slices = [SliceFit(float(t), C, beta, np.eye(2) * 1e-4, (6, 8, 10)) for t in T_GRID]
    return FiniteSizeFit(slices)


def test_report_arithmetic():
    rep = advantage_report({"eigenshadow": _flat_fit()}, {10: 0.75}, [10], eta=0.01, cycle_time_s=1e-6)
    p = rep.points[0]
    assert p.T_eta == pytest.approx(0.74)
    assert p.n_c == pytest.approx(32768)
    assert p.runtime_s == pytest.approx(0.032768)
    assert p.is_best


def test_report_chance_collapse():
    rep = advantage_report({"ml": _flat_fit()}, lambda n: 0.5, [4], eta=0.01)
    p = rep.points[0]
    assert p.log2_nc == 0.0 and p.n_c == 1.0 and p.censor_flag == "chance"


def test_report_upper_censor_and_best():
    fits = {"a": _flat_fit(1.5), "b": _flat_fit(1.2)}
    rep = advantage_report(fits, {8: 0.995, 9: 0.8}, [8, 9], eta=0.01)
    assert all(p.censor_flag == "upper" for p in rep.points if p.n_q == 8)
    assert rep.best(8) is None
    assert rep.best(9).method == "b"
    rows = rep.rows()
    assert len(rows) == 4 and {"ci95_lo", "runtime_s", "is_best"} <= set(rows[0])
    with pytest.raises(ValueError):
        advantage_report({}, {8: 0.9}, [8])


def test_report_untrusted_extrapolation():
    T = [0.55, 0.63, 0.71]
    surf = _surface(lambda t, n: 1.0 + 0.5 / n, [4, 5, 6, 7], T)
    v = forward_validation(surf)
    rep = advantage_report({"m": fit_finite_size(surf)}, {6: 0.7, 12: 0.7}, [6, 12], validation={"m": v})
    obs, ext = rep.points
    assert obs.observed and obs.trusted
    assert not ext.observed and not ext.trusted
    assert rep.best(12) is None
