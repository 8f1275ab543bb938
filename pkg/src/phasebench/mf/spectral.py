"""Shadow-based decoders of the parity bit and their closed-form sample-complexity laws."""
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.stats import norm

from ..noise import NoiseChannelSpec, attenuation
from ..phase_states import Concept
from ..rng import RandomSource, as_generator
from ..shadows import SurrogateSectorSample

__all__ = [
    "MfPrediction", "single_element_decode", "sum_decode", "eigenshadow_decode",
    "principal_eigenvector", "power_iteration", "scaling_law", "ScalingLaw", "SCALING_LAWS",
    "master_sum", "master_sum_brute", "single_element_snr", "predicted_single_accuracy",
    "local_snr", "global_snr",
]


@dataclass(frozen=True)
class MfPrediction:
    bit: int
    score: float
    method: str
    converged: bool = True

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")


def _alpha_int(alpha) -> int:
    return alpha.alpha if isinstance(alpha, Concept) else int(alpha)


def _from_score(score: float, method: str, rng, key, converged=True) -> MfPrediction:
    if score > 0:
        return MfPrediction(0, score, method, converged)
    if score < 0:
        return MfPrediction(1, score, method, converged)
    gen = as_generator(rng if rng is not None else RandomSource(0, key))
    return MfPrediction(int(gen.integers(2)), 0.0, method, converged)


def single_element_decode(sample: SurrogateSectorSample, y, alpha, rng=None) -> MfPrediction:
    """Sign of Re rho[y^alpha, y]; score is that value times 2^n."""
    a = _alpha_int(alpha)
    sample.require("row")
    if sample.y is not None and sample.y != int(y):
        raise ValueError("sample was drawn for a different y")
    score = float(np.real(sample.row[int(y)])) * (1 << sample.n_q)
    return _from_score(score, "single", rng, (int(y), a))


def sum_decode(sample: SurrogateSectorSample, y, alpha, domain: str = "global", rng=None) -> MfPrediction:
    """Sign of Re sum_t rho[y^alpha, t] rho[t, y] over the alpha subcube (local) or all t (global)."""
    a = _alpha_int(alpha)
    y = int(y)
    sample.require("row", "col")
    if domain == "global":
        prod = sample.row * sample.col
        total = complex(prod.sum())
    elif domain == "local":
        subs = _subsets(a)
        t = y ^ subs
        total = complex((sample.row[t] * sample.col[t]).sum())
    else:
        raise ValueError("domain must be 'local' or 'global'")
    score = total.real * 4.0 ** sample.n_q
    return _from_score(score, domain, rng, (y, a))


def _subsets(mask: int) -> np.ndarray:
    out = [0]
    bit = 1
    while bit <= mask:
        if mask & bit:
            out += [s | bit for s in out]
        bit <<= 1
    return np.array(sorted(out), dtype=np.int64)


def power_iteration(mat, rng=None, tol: float = 1e-10, max_iter: int = 10_000):
    """Top eigenpair of a Hermitian matrix by power iteration on mat + shift * I.

    The shift is the largest absolute row sum, which makes every shifted
    eigenvalue non-negative so the algebraically largest one dominates.
    Stops when successive Rayleigh quotients differ by less than ``tol`` and
    the residual |A v - lam v| is below sqrt(tol); the shift slows
    convergence enough that the first test alone can stop early.
    Returns (eigenvalue, unit vector, converged).
    """
    a = np.asarray(mat)
    n = a.shape[0]
    shift = float(np.abs(a).sum(axis=1).max())
    gen = as_generator(rng if rng is not None else 0)
    v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    v /= np.linalg.norm(v)
    av = a @ v
    lam_old = np.inf
    res_tol = math.sqrt(tol)
    for _ in range(int(max_iter)):
        w = av + shift * v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0, v, False
        v = w / nrm
        av = a @ v
        lam = float(np.real(np.vdot(v, av)))
        if abs(lam - lam_old) < tol and np.linalg.norm(av - lam * v) < res_tol:
            return lam, v, True
        lam_old = lam
    return lam_old, v, False


def principal_eigenvector(mat, method: str = "eigh", rng=None):
    if method == "eigh":
        w, v = eigh(mat, subset_by_index=[mat.shape[0] - 1, mat.shape[0] - 1], driver="evr")
        return float(w[0]), v[:, 0], True
    if method == "power":
        return power_iteration(mat, rng)
    raise ValueError("method must be 'eigh' or 'power'")


def eigenshadow_decode(sample: SurrogateSectorSample, y, alpha, method: str = "eigh", rng=None,
                       vector=None) -> MfPrediction:
    """Relative sign of the principal eigenvector at y and y^alpha.

    Pass a precomputed ``vector`` to decode many queries from one sample.
    If power iteration does not converge the score is 0 (a fair coin).
    """
    a = _alpha_int(alpha)
    y = int(y)
    converged = True
    if vector is None:
        if sample.full is None:
            raise ValueError("eigenshadow decoding needs the full matrix")
        _, vector, converged = principal_eigenvector(sample.full, method, rng)
    score = float(np.real(vector[y] * np.conj(vector[y ^ a]))) * (1 << sample.n_q) if converged else 0.0
    return _from_score(score, "eigenshadow", rng, (y, a), converged)


def master_sum(n_q: int, alpha_weight: int, beta_act: float, beta_pass: float) -> float:
    """(2 beta_act)^|alpha| (1 + beta_pass^2)^(n - |alpha|)."""
    return (2.0 * beta_act) ** alpha_weight * (1.0 + beta_pass ** 2) ** (n_q - alpha_weight)


def master_sum_brute(n_q: int, alpha: int, beta_act: float, beta_pass: float) -> float:
    """Hypercube sum with every active bit counted once and passive bit k counted 2 z_k times."""
    z = np.arange(1 << n_q)
    w_act = bin(alpha).count("1")
    w_pass = 2 * np.bitwise_count((z & ~alpha).astype(np.uint64)).astype(np.int64)
    return float(np.sum(beta_act ** w_act * beta_pass ** w_pass))


def _gammas(prep: NoiseChannelSpec):
    g = attenuation(prep)
    return g.gamma_act, g.gamma_pass


def single_element_snr(n_q: int, alpha_weight: int, prep: NoiseChannelSpec, n_c) -> float:
    """|mean Re r_y| over the standard deviation of its real part."""
    ga, gp = _gammas(prep)
    mu = 2.0 ** (-n_q) * ga ** alpha_weight * gp ** (n_q - alpha_weight)
    sigma = math.sqrt((1.5 ** alpha_weight - 4.0 ** (-n_q)) / (2.0 * n_c))
    return abs(mu) / sigma


def predicted_single_accuracy(n_q, alpha_weight, prep, n_c) -> float:
    return float(norm.cdf(single_element_snr(n_q, alpha_weight, prep, n_c)))


def local_snr(n_q, alpha_weight, prep, n_c) -> float:
    ga, gp = _gammas(prep)
    return 2.0 * n_c / 4.0 ** n_q * (2.0 * ga / math.sqrt(3.0)) ** alpha_weight * gp ** (n_q - alpha_weight)


def global_snr(n_q, alpha_weight, prep, n_c) -> float:
    ga, gp = _gammas(prep)
    return (2.0 * n_c / 4.0 ** n_q * (2.0 * ga / math.sqrt(3.0)) ** alpha_weight
            * ((1.0 + gp ** 2) / math.sqrt(3.25)) ** (n_q - alpha_weight))


def _nc_single(n_q, w, ga, gp):
    return 4.0 ** n_q * (1.5 / ga ** 2) ** w * gp ** (-2 * (n_q - w))


def _nc_local(n_q, w, ga, gp):
    return 4.0 ** n_q * (math.sqrt(3.0) / 2.0 / ga) ** w * gp ** (-(n_q - w))


def _nc_global(n_q, w, ga, gp):
    return 4.0 ** n_q * (math.sqrt(3.0) / 2.0 / ga) ** w * (math.sqrt(3.25) / (1.0 + gp ** 2)) ** (n_q - w)


def _nc_eigen(n_q, w, ga, gp):
    g_eff = 0.5 * (ga + gp)
    if g_eff <= 0.5:
        return math.inf
    return (2.5 / g_eff ** 2) ** n_q


@dataclass(frozen=True)
class ScalingLaw:
    method: str
    evaluator: object

    def __call__(self, n_q: int, alpha_weight: int, gamma_act: float, gamma_pass: float) -> float:
        with np.errstate(divide="ignore", over="ignore"):
            try:
                val = self.evaluator(n_q, alpha_weight, gamma_act, gamma_pass)
            except ZeroDivisionError:
                return math.inf
        return max(1.0, float(val))


SCALING_LAWS = {
    "single": ScalingLaw("single", _nc_single),
    "local": ScalingLaw("local", _nc_local),
    "global": ScalingLaw("global", _nc_global),
    "eigenshadow": ScalingLaw("eigenshadow", _nc_eigen),
}


def scaling_law(method: str, n_q: int, alpha_weight: int, prep: NoiseChannelSpec) -> float:
    """Copies needed for unit SNR, up to constant factors."""
    if method not in SCALING_LAWS:
        raise ValueError(f"unknown method {method!r}")
    ga, gp = _gammas(prep)
    return SCALING_LAWS[method](n_q, alpha_weight, ga, gp)
