"""Per-threshold weighted fits of k_x = C + beta / n_q, interpolated across thresholds."""
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .bootstrap import ThresholdSurface

__all__ = ["SliceFit", "FiniteSizeFit", "wls_inverse_size", "fit_finite_size", "SIGMA_FLOOR"]

SIGMA_FLOOR = 1e-3  # keeps weights finite when every replicate crosses at the same k


@dataclass(frozen=True)
class SliceFit:
    T: float
    C: float
    beta: float
    cov: np.ndarray  # covariance of (C, beta)
    n_q: tuple


def wls_inverse_size(n_q, k, sigma, sigma_floor: float = SIGMA_FLOOR):
    """Weighted least squares for k = C + beta / n_q; returns (C, beta, cov)."""
    n = np.asarray(n_q, dtype=float)
    k = np.asarray(k, dtype=float)
    s = np.maximum(np.asarray(sigma, dtype=float), sigma_floor)
    if n.size < 2:
        raise ValueError("need at least two sizes")
    x = np.column_stack([np.ones_like(n), 1.0 / n])
    w = 1.0 / s ** 2
    xtwx = x.T @ (w[:, None] * x)
    cov = np.linalg.inv(xtwx)
    theta = cov @ (x.T @ (w * k))
    return float(theta[0]), float(theta[1]), cov


def _interp(xk, yk):
    if xk.size == 1:
        return lambda x: np.full(np.shape(x), yk[0], dtype=float)
    if xk.size == 2:
        return lambda x: np.interp(x, xk, yk)
    return PchipInterpolator(xk, yk, extrapolate=False)


@dataclass
class FiniteSizeFit:
    slices: list

    def __post_init__(self):
        if not self.slices:
            raise ValueError("no threshold slice could be fitted")
        self.slices = sorted(self.slices, key=lambda s: s.T)
        self.T = np.array([s.T for s in self.slices])
        self._C = _interp(self.T, np.array([s.C for s in self.slices]))
        self._beta = _interp(self.T, np.array([s.beta for s in self.slices]))
        covs = np.array([s.cov for s in self.slices])
        self._cov = [[_interp(self.T, covs[:, i, j]) for j in range(2)] for i in range(2)]

    @property
    def support(self):
        return float(self.T[0]), float(self.T[-1])

    def in_support(self, T) -> bool:
        lo, hi = self.support
        return lo - 1e-12 <= T <= hi + 1e-12

    def C(self, T):
        return float(self._C(np.clip(T, *self.support)))

    def beta(self, T):
        return float(self._beta(np.clip(T, *self.support)))

    def k_x(self, T, n_q) -> float:
        return self.C(T) + self.beta(T) / n_q

    def cov(self, T) -> np.ndarray:
        t = np.clip(T, *self.support)
        return np.array([[float(self._cov[i][j](t)) for j in range(2)] for i in range(2)])

    def sigma_wls_log2(self, T, n_q) -> float:
        """Parametric sd of log2 n_c = n_q C + beta; small negative variances are clipped."""
        g = np.array([float(n_q), 1.0])
        return float(np.sqrt(max(g @ self.cov(T) @ g, 0.0)))

    def profile(self, n_q, guard: bool = False, n_grid: int = 256):
        """k_x over a dense threshold grid; the guard replaces it with its running maximum."""
        grid = np.linspace(*self.support, n_grid)
        prof = np.array([self.k_x(t, n_q) for t in grid])
        if guard:
            prof = np.maximum.accumulate(prof)
        return grid, prof


def fit_finite_size(surface: ThresholdSurface, min_points: int = 3, sigma_floor: float = SIGMA_FLOOR) -> FiniteSizeFit:
    slices = []
    for T in surface.thresholds:
        pts = surface.slice(T)
        if len(pts) < min_points:
            continue
        n = [p.n_q for p in pts]
        C, beta, cov = wls_inverse_size(n, [p.k_med for p in pts], [p.sigma_k for p in pts], sigma_floor)
        slices.append(SliceFit(float(T), C, beta, cov, tuple(n)))
    return FiniteSizeFit(slices)
