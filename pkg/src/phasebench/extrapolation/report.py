"""Required classical copies to match the coherent protocol, with bands and trust flags."""
import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fit import FiniteSizeFit
from .validation import ValidationDiagnostics

__all__ = ["AdvantagePoint", "AdvantageReport", "advantage_report", "REPORT_COLUMNS",
           "CHANCE_FLOOR", "UPPER_EDGE", "SCHEMA_VERSION", "DEFAULT_CYCLE_TIME_S"]

CHANCE_FLOOR = 0.52
UPPER_EDGE = 0.97
Z95 = 1.959964
SCHEMA_VERSION = 1
DEFAULT_CYCLE_TIME_S = 1e-6

REPORT_COLUMNS = [
    "n_q", "method", "channel", "eps_p", "eps_r", "alpha_rule", "eta", "A_Q", "T_eta", "log2_nc",
    "ci68_lo", "ci68_hi", "ci95_lo", "ci95_hi", "runtime_s", "trusted", "censor_flag", "is_best",
]


@dataclass
class AdvantagePoint:
    n_q: int
    method: str
    A_Q: float
    T_eta: float
    log2_nc: float
    sigma_eff: float
    runtime_s: float
    trusted: bool
    censor_flag: str
    observed: bool
    is_best: bool = False

    @property
    def n_c(self) -> float:
        return 2.0 ** self.log2_nc if math.isfinite(self.log2_nc) else math.inf

    def band(self, z: float):
        if not math.isfinite(self.log2_nc):
            return float("nan"), float("nan")
        return max(0.0, self.log2_nc - z * self.sigma_eff), self.log2_nc + z * self.sigma_eff


@dataclass
class AdvantageReport:
    points: list
    eta: float
    cycle_time_s: float
    meta: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def best(self, n_q: int):
        for p in self.points:
            if p.n_q == n_q and p.is_best:
                return p
        return None

    def rows(self) -> list:
        out = []
        for p in self.points:
            lo68, hi68 = p.band(1.0)
            lo95, hi95 = p.band(Z95)
            out.append({
                "n_q": p.n_q, "method": p.method, "channel": self.meta.get("channel", ""),
                "eps_p": self.meta.get("eps_p", ""), "eps_r": self.meta.get("eps_r", ""),
                "alpha_rule": self.meta.get("alpha_rule", ""), "eta": self.eta, "A_Q": p.A_Q,
                "T_eta": p.T_eta, "log2_nc": p.log2_nc, "ci68_lo": lo68, "ci68_hi": hi68,
                "ci95_lo": lo95, "ci95_hi": hi95, "runtime_s": p.runtime_s, "trusted": p.trusted,
                "censor_flag": p.censor_flag, "is_best": p.is_best,
            })
        return out

    def write_csv(self, path, extra: dict | None = None):
        extra = extra or {}
        cols = REPORT_COLUMNS + list(extra)
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for row in self.rows():
                row.update(extra)
                w.writerow(row)

    def to_json(self, extra: dict | None = None) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION, "eta": self.eta, "cycle_time_s": self.cycle_time_s,
            "meta": self.meta, "diagnostics": self.diagnostics, "points": [asdict(p) for p in self.points],
        }
        doc.update(extra or {})
        return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def _summary(v: ValidationDiagnostics | None) -> dict:
    if v is None:
        return {"trusted": False, "reasons": ["no validation data"]}
    return {
        "trusted": v.trusted, "reasons": v.reasons, "n_hor": v.n_hor, "rmse_pooled": v.rmse_pooled,
        "rmse_max": v.rmse_max, "rmse_ratio": v.rmse_ratio, "sigma_cv_obs": v.sigma_cv_obs,
        "sigma_cv_extrap": v.sigma_cv_extrap, "boundary_sigma_log2": v.boundary_sigma_log2,
        "slices": [float(s) for s in v.slices],
    }


def advantage_report(fits: dict, a_q, n_q_values, eta: float = 0.01, cycle_time_s: float = DEFAULT_CYCLE_TIME_S,
                     validation: dict | None = None, meta: dict | None = None) -> AdvantageReport:
    """Per n_q and MF method: log2 n_c = n_q * k_x(A_Q - eta, n_q), plus the cheapest method.

    ``a_q`` maps n_q to the coherent accuracy (callable or dict). Points above
    the largest observed size count only when the method's gates pass.
    """
    if not fits:
        raise ValueError("no fitted methods")
    if eta < 0:
        raise ValueError("eta must be non-negative")
    validation = validation or {}
    get_aq = a_q if callable(a_q) else (lambda n: a_q[n])
    n_q_values = sorted(int(n) for n in n_q_values)
    if not n_q_values:
        raise ValueError("empty n_q range")
    points = []
    for n in n_q_values:
        aq = float(get_aq(n))
        t_eta = aq - eta
        for method, fit in fits.items():
            v = validation.get(method)
            n_obs = v.n_obs_max if v is not None else max(max(s.n_q) for s in fit.slices)
            observed = n <= n_obs
            trusted = observed or (v is not None and v.trusted)
            if t_eta < CHANCE_FLOOR:
                points.append(AdvantagePoint(n, method, aq, t_eta, 0.0, 0.0, cycle_time_s, trusted,
                                             "chance", observed))
                continue
            if t_eta > UPPER_EDGE or not fit.in_support(t_eta):
                flag = "upper" if t_eta > fit.support[1] else "lower"
                points.append(AdvantagePoint(n, method, aq, t_eta, float("nan"), float("nan"),
                                             float("nan"), trusted, flag, observed))
                continue
            log2 = max(0.0, n * fit.k_x(t_eta, n))
            if v is not None and math.isfinite(v.sigma_cv_extrap):
                cv = v.sigma_cv_obs if observed and math.isfinite(v.sigma_cv_obs) else v.sigma_cv_extrap
            else:
                cv = 0.0
            sig = math.hypot(fit.sigma_wls_log2(t_eta, n), n * cv)
            points.append(AdvantagePoint(n, method, aq, t_eta, log2, sig, 2.0 ** log2 * cycle_time_s,
                                         trusted, "", observed))
    for n in n_q_values:
        cands = [p for p in points if p.n_q == n and p.trusted and math.isfinite(p.log2_nc)]
        if cands:
            min(cands, key=lambda p: (p.log2_nc, p.method)).is_best = True
    diag = {m: _summary(validation.get(m)) for m in fits}
    return AdvantageReport(points, float(eta), float(cycle_time_s), dict(meta or {}), diag)
