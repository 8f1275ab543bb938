"""Forward-chaining validation in n_q and the extrapolation trust gates."""
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import ThresholdSurface
from .fit import SIGMA_FLOOR, wls_inverse_size

__all__ = ["ValidationDiagnostics", "forward_validation", "select_slices", "TrustGates"]

PERCENTILE_TARGETS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class TrustGates:
    min_horizons: int = 12
    max_boundary_sigma: float = 1.0  # log2 n_c units
    max_rmse_ratio: float = 2.5
    min_slices: int = 3
    min_points: int = 3


@dataclass
class ValidationDiagnostics:
    residuals: np.ndarray
    horizons: np.ndarray
    slice_of: np.ndarray
    slices: list
    n_hor: int
    rmse_pooled: float
    rmse_max: float
    rmse_by_h: dict
    bias: float
    sigma_cv_obs: float
    sigma_cv_extrap: float
    n_obs_max: int
    boundary_sigma_log2: float
    coverage: dict
    trusted: bool
    reasons: list = field(default_factory=list)

    @property
    def rmse_ratio(self) -> float:
        return self.rmse_max / self.rmse_pooled if self.rmse_pooled > 0 else 1.0


def select_slices(usable_T, targets=PERCENTILE_TARGETS) -> list:
    """Snap percentile targets to indices of the usable threshold slices (deduplicated)."""
    usable = sorted(usable_T)
    if not usable:
        return []
    out = []
    for q in targets:
        t = usable[int(round(q * (len(usable) - 1)))]
        if t not in out:
            out.append(t)
    return out


def _q6827(x):
    return float(np.quantile(np.abs(x), 0.6827)) if len(x) else float("nan")


def forward_validation(surface: ThresholdSurface, slices=None, horizons=(1, 2, 3), t_min: int = 3,
                       gates: TrustGates = TrustGates(), sigma_floor: float = SIGMA_FLOOR) -> ValidationDiagnostics:
    """Fit on the first t sizes, forecast the next h; pool residuals over slices and horizons."""
    per_slice = {T: surface.slice(T) for T in surface.thresholds}
    usable = [T for T, pts in per_slice.items() if len(pts) >= gates.min_points]
    chosen = list(slices) if slices is not None else select_slices(usable)
    chosen = [T for T in chosen if T in usable]
    res, hs, sl = [], [], []
    for si, T in enumerate(chosen):
        pts = per_slice[T]
        n = np.array([p.n_q for p in pts], dtype=float)
        k = np.array([p.k_med for p in pts])
        s = np.array([p.sigma_k for p in pts])
        for t in range(t_min, len(pts)):
            C, beta, _ = wls_inverse_size(n[:t], k[:t], s[:t], sigma_floor)
            for h in horizons:
                j = t - 1 + h
                if j >= len(pts):
                    break
                res.append(k[j] - (C + beta / n[j]))
                hs.append(h)
                sl.append(si)
    res = np.array(res)
    hs = np.array(hs, dtype=np.int64)
    sl = np.array(sl, dtype=np.int64)
    n_obs_max = max(surface.n_q_values) if surface.n_q_values else 0
    reasons = []
    if len(chosen) < gates.min_slices or res.size == 0:
        reasons.append("validation not applicable")
    n_hor = int(res.size)
    if n_hor < gates.min_horizons:
        reasons.append("insufficient horizons")
    if res.size:
        rmse_pooled = float(np.sqrt(np.mean(res ** 2)))
        rmse_max = max(float(np.sqrt(np.mean(res[sl == i] ** 2))) for i in np.unique(sl))
        rmse_by_h = {int(h): float(np.sqrt(np.mean(res[hs == h] ** 2))) for h in np.unique(hs)}
        bias = float(res.mean())
    else:
        rmse_pooled = rmse_max = bias = float("nan")
        rmse_by_h = {}
    sig_obs = _q6827(res[hs == 1]) if res.size else float("nan")
    sig_ext = _q6827(res)
    boundary = n_obs_max * sig_ext if res.size else float("inf")
    if res.size and not boundary <= gates.max_boundary_sigma:
        reasons.append("boundary discrepancy")
    ratio = rmse_max / rmse_pooled if res.size and rmse_pooled > 0 else 1.0
    if res.size and ratio > gates.max_rmse_ratio:
        reasons.append("slice instability")
    coverage = {}
    if res.size and sig_ext > 0:
        for z in (1.0, 1.64485, 1.95996):
            coverage[z] = float(np.mean(np.abs(res) <= z * sig_ext))
    return ValidationDiagnostics(res, hs, sl, chosen, n_hor, rmse_pooled, rmse_max, rmse_by_h, bias,
                                 sig_obs, sig_ext, n_obs_max, boundary, coverage, not reasons, reasons)
