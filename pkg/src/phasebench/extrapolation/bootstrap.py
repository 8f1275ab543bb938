"""Curve-level bootstrap of threshold crossings."""
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..rng import as_source
from .crossing import T_GRID, AccuracyCurve, crossings_many, threshold_crossing

__all__ = ["ThresholdSurface", "SurfacePoint", "bootstrap_surface", "MIN_SUCCESSES"]

MIN_SUCCESSES = 20


@dataclass(frozen=True)
class SurfacePoint:
    T: float
    n_q: int
    k_med: float
    k_lo: float
    k_hi: float
    sigma_k: float
    successes: int
    censor: str | None  # censoring of the point estimate on the mean curve


@dataclass
class ThresholdSurface:
    points: list
    thresholds: np.ndarray
    n_q_values: list
    z_boot: float
    n_boot: int

    def slice(self, T) -> list:
        return sorted((p for p in self.points if abs(p.T - T) < 1e-9), key=lambda p: p.n_q)

    def get(self, T, n_q):
        for p in self.points:
            if abs(p.T - T) < 1e-9 and p.n_q == n_q:
                return p
        return None


def bootstrap_surface(curves, thresholds=T_GRID, n_boot: int = 1600, alpha_ci: float = 0.10,
                      rng=0, min_successes: int = MIN_SUCCESSES) -> ThresholdSurface:
    """Resample whole replicate curves per n_q, invert each resampled mean curve.

    Points with fewer than ``min_successes`` finite in-range crossings are dropped.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("no curves")
    if not 0 < alpha_ci < 1:
        raise ValueError("alpha_ci must lie in (0, 1)")
    src = as_source(rng)
    t = np.asarray(thresholds, dtype=float)
    z = float(norm.ppf(1 - alpha_ci / 2))
    points = []
    for curve in sorted(curves, key=lambda c: c.n_q):
        if not isinstance(curve, AccuracyCurve) or curve.replicates is None or curve.replicates.shape[0] < 2:
            raise ValueError(f"need at least 2 replicate curves at n_q={getattr(curve, 'n_q', '?')}")
        reps = curve.replicates
        gen = src.child(int(curve.n_q)).generator()
        idx = gen.integers(0, reps.shape[0], size=(n_boot, reps.shape[0]))
        boot = reps[idx].mean(axis=1)
        kx = crossings_many(curve.k, boot, t)
        for j, T in enumerate(t):
            col = kx[:, j]
            good = col[np.isfinite(col)]
            if good.size < min_successes:
                continue
            lo, med, hi = np.quantile(good, [alpha_ci / 2, 0.5, 1 - alpha_ci / 2])
            point = threshold_crossing(curve.k, curve.accuracy, float(T))
            points.append(SurfacePoint(float(T), int(curve.n_q), float(med), float(lo), float(hi),
                                       float((hi - lo) / 2 / z), int(good.size), point.censor))
    return ThresholdSurface(points, t, sorted({c.n_q for c in curves}), z, n_boot)
