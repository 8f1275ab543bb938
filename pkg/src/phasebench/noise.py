"""Single-qubit preparation channels, attenuation factors and idle/gate noise parameters."""
import math
from dataclasses import dataclass

import numpy as np

from .bits import popcount

__all__ = [
    "CHANNEL_KINDS", "NoiseChannelSpec", "AttenuationFactors", "IdleNoiseSpec",
    "kraus_operators", "attenuation", "expected_visibility_vp", "idle_probabilities",
    "gate_error_params", "phase_damping_flip_probability", "apply_channel_to_density",
    "noisy_diagonal", "damping_matrix",
]

CHANNEL_KINDS = ("dephasing", "depolarizing", "relaxation")

_I = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True)
class NoiseChannelSpec:
    kind: str
    epsilon_p: float = 0.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        eps = float(self.epsilon_p)
        if not 0.0 <= eps <= 1.0 or math.isnan(eps):
            raise ValueError(f"epsilon_p must lie in [0, 1], got {self.epsilon_p}")
        object.__setattr__(self, "epsilon_p", eps)

    @property
    def is_pauli(self) -> bool:
        return self.kind != "relaxation"

    @property
    def trivial(self) -> bool:
        return self.epsilon_p == 0.0


@dataclass(frozen=True)
class AttenuationFactors:
    gamma_act: float
    gamma_pass: float
    gamma_p0: float
    gamma_p1: float


def kraus_operators(spec: NoiseChannelSpec) -> list:
    """Kraus operators of the channel, identically-zero operators dropped."""
    e = spec.epsilon_p
    if spec.kind == "dephasing":
        ops = [math.sqrt(1 - e) * _I, math.sqrt(e) * _Z]
    elif spec.kind == "depolarizing":
        s = math.sqrt(e / 3)
        ops = [math.sqrt(1 - e) * _I, s * _X, s * _Y, s * _Z]
    else:
        k0 = np.array([[1, 0], [0, math.sqrt(1 - e)]], dtype=np.complex128)
        k1 = np.array([[0, math.sqrt(e)], [0, 0]], dtype=np.complex128)
        ops = [k0, k1]
    return [k for k in ops if np.any(k != 0)]


def attenuation(spec: NoiseChannelSpec) -> AttenuationFactors:
    e = spec.epsilon_p
    if spec.kind == "dephasing":
        return AttenuationFactors(1 - 2 * e, 1.0, 1.0, 1.0)
    if spec.kind == "depolarizing":
        p = 1 - 2 * e / 3
        return AttenuationFactors(1 - 4 * e / 3, p, p, p)
    return AttenuationFactors(math.sqrt(1 - e), 1 - e / 2, 1.0, 1 - e)


def expected_visibility_vp(spec: NoiseChannelSpec, n_q: int, alpha_weight: int) -> float:
    """Preparation visibility gamma_act^|alpha| * gamma_pass^(n_q - |alpha|)."""
    if not 1 <= alpha_weight <= n_q:
        raise ValueError("need 1 <= |alpha| <= n_q")
    if spec.kind == "depolarizing" and spec.epsilon_p > 0.75:
        raise ValueError("depolarizing visibility is undefined above epsilon_p = 3/4")
    g = attenuation(spec)
    return g.gamma_act ** alpha_weight * g.gamma_pass ** (n_q - alpha_weight)


def damping_matrix(spec: NoiseChannelSpec, n_q: int) -> np.ndarray:
    """Per-element damping factors of the density matrix (off-diagonal model).

    Differing bits contribute gamma_act; equal bits contribute gamma_p0 or
    gamma_p1 by value. Feeding terms are not included.
    """
    g = attenuation(spec)
    dim = 1 << n_q
    idx = np.arange(dim)
    diff = idx[:, None] ^ idx[None, :]
    same_one = idx[:, None] & idx[None, :]
    w_diff = popcount(diff)
    w_one = popcount(same_one)
    w_zero = n_q - w_diff - w_one
    return g.gamma_act ** w_diff * g.gamma_p1 ** w_one * g.gamma_p0 ** w_zero


def noisy_diagonal(spec: NoiseChannelSpec, n_q: int) -> np.ndarray:
    """Exact populations of E(|psi_f><psi_f|): they do not depend on f."""
    dim = 1 << n_q
    ones = popcount(np.arange(dim))
    if spec.kind == "relaxation":
        e = spec.epsilon_p
        return (0.5 * (1 + e)) ** (n_q - ones) * (0.5 * (1 - e)) ** ones
    return np.full(dim, 1.0 / dim)


def apply_channel_to_density(rho: np.ndarray, ops: list, qubit: int) -> np.ndarray:
    """Exact action of a single-qubit channel on ``qubit`` of a density matrix."""
    dim = rho.shape[0]
    n_q = dim.bit_length() - 1
    t = rho.reshape((2,) * (2 * n_q))
    ax_row = n_q - 1 - qubit
    ax_col = 2 * n_q - 1 - qubit
    out = np.zeros_like(t)
    for k in ops:
        a = np.moveaxis(np.tensordot(k, t, axes=([1], [ax_row])), 0, ax_row)
        a = np.moveaxis(np.tensordot(a, k.conj(), axes=([ax_col], [1])), -1, ax_col)
        out += a
    return out.reshape(dim, dim)


@dataclass(frozen=True)
class IdleNoiseSpec:
    t1: float
    t2: float
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("negative idle duration")
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("coherence times must be positive")
        if math.isfinite(self.t1) and math.isfinite(self.t2) and self.t2 > 2 * self.t1 * (1 + 1e-12):
            raise ValueError("T2 must not exceed 2*T1")


def idle_probabilities(spec: IdleNoiseSpec):
    """(p_amp, p_phase) for an idle interval: amplitude damping then phase damping."""
    t = spec.duration
    p_amp = 0.0 if math.isinf(spec.t1) else 1.0 - math.exp(-t / spec.t1)
    rate = (0.0 if math.isinf(spec.t2) else 1.0 / spec.t2) - (0.0 if math.isinf(spec.t1) else 0.5 / spec.t1)
    # guard tiny negative rates from float rounding at T2 = 2 T1
    rate = max(0.0, rate) if rate > 1e-15 else 0.0
    p_phase = 1.0 - math.exp(-t * rate)
    return p_amp, p_phase


def phase_damping_flip_probability(p_phase: float) -> float:
    """Z-flip probability reproducing phase damping with parameter p_phase.

    Phase damping multiplies coherences by sqrt(1 - p_phase); a Z flip with
    probability q multiplies them by 1 - 2q.
    """
    return 0.5 * (1.0 - math.sqrt(1.0 - p_phase))


def gate_error_params(f1q: float, f2q: float):
    for f in (f1q, f2q):
        if not 0.0 <= f <= 1.0:
            raise ValueError("fidelities must lie in [0, 1]")
    return 1.5 * (1.0 - f1q), 1.25 * (1.0 - f2q)
