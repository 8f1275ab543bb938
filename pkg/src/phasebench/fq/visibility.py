"""Visibility factors of the coherent protocol and the stretched-exponential circuit model."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..noise import NoiseChannelSpec, expected_visibility_vp
from ..phase_states import concept_for_rule
from ..rng import as_source
from .devices import DeviceModel

__all__ = [
    "readout_visibility", "VisibilityModel", "fit_vm", "predict_accuracy",
    "estimate_vm", "REFERENCE_VM",
]


def readout_visibility(n_q: int, eps_r: float) -> float:
    """(1 - 2 eps_r)(1 - eps_r)^(n_q - 1): the parity bit flips, the other bits randomize."""
    if not 0.0 <= eps_r <= 0.5:
        raise ValueError("eps_r must lie in [0, 1/2]")
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    return (1.0 - 2.0 * eps_r) * (1.0 - eps_r) ** (n_q - 1)


@dataclass(frozen=True)
class VisibilityModel:
    c: float
    beta: float
    amplitude: float = 1.0
    device: str = ""

    def __post_init__(self):
        if not 0.0 < self.amplitude <= 1.0:
            raise ValueError("amplitude must lie in (0, 1]")
        if self.c < 0 or self.beta <= 0:
            raise ValueError("need c >= 0 and beta > 0")

    def __call__(self, alpha_weight) -> float:
        w = np.asarray(alpha_weight, dtype=float)
        return self.amplitude * np.exp(-self.c * w ** self.beta)


# reference constants from another transpiler; local fits replace them in the pipelines
REFERENCE_VM = {
    "A": VisibilityModel(0.00851, 1.1477, 1.0, "A"),
    "B": VisibilityModel(0.00032, 2.1760, 1.0, "B"),
    "C": VisibilityModel(0.00342, 2.1803, 1.0, "C"),
}


def fit_vm(weights, values, device: str = "") -> VisibilityModel:
    """Fit V = exp(-c w^beta) (amplitude fixed to 1) by least squares on log V."""
    w = np.asarray(weights, dtype=float)
    v = np.asarray(values, dtype=float)
    if w.shape != v.shape:
        raise ValueError("weights and values must align")
    keep = (v > 0) & (w > 0)
    w, v = w[keep], v[keep]
    if w.size < 3:
        raise ValueError("need at least 3 points with positive visibility")
    if np.ptp(v) == 0:
        raise ValueError("degenerate fit: all visibilities are equal")
    y = -np.log(np.minimum(v, 1.0))
    inner = (y > 0) & (y < np.inf)
    if inner.sum() >= 2 and np.ptp(np.log(w[inner])) > 0:
        slope, icpt = np.polyfit(np.log(w[inner]), np.log(y[inner]), 1)
        x0 = [math.exp(icpt), max(slope, 1e-3)]
    else:
        x0 = [max(float(y.mean()), 1e-6), 1.0]

    def resid(p):
        return np.log(v) + p[0] * w ** p[1]

    sol = least_squares(resid, x0, bounds=([0.0, 1e-6], [np.inf, 20.0]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return VisibilityModel(float(sol.x[0]), float(sol.x[1]), 1.0, device)


def predict_accuracy(n_q: int, alpha_weight: int, prep: NoiseChannelSpec, device: DeviceModel | None,
                     vm: VisibilityModel | None) -> float:
    """(1 + V_p V_m V_r) / 2."""
    vp = expected_visibility_vp(prep, n_q, alpha_weight)
    vmv = 1.0 if vm is None else float(vm(alpha_weight))
    vr = 1.0 if device is None else readout_visibility(n_q, device.eps_r)
    return 0.5 * (1.0 + vp * vmv * vr)


def estimate_vm(device: DeviceModel, n_q: int, alpha_rule="full", weight=None, n_functions: int = 20,
                n_shots: int = 500, rng=0, routing_trials: int = 16, passive_idle: bool = True):
    """Circuit-only visibility 2A - 1 with ideal preparation and perfect readout.

    Returns (V_m, standard error, alpha weight).
    """
    from .simulate import SimulationBudget, simulate_protocol

    alpha = concept_for_rule(n_q, alpha_rule, weight)
    dev = device.with_overrides(eps_r=0.0)
    res = simulate_protocol(n_functions, alpha, NoiseChannelSpec("dephasing", 0.0), dev,
                            SimulationBudget(n_functions, 1, n_shots), as_source(rng),
                            routing_trials=routing_trials, passive_idle=passive_idle)
    return 2.0 * res.accuracy - 1.0, 2.0 * res.stderr, alpha.weight
