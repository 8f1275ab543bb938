"""Dense statevector engine: gates, Kraus unraveling, Born sampling, readout flips."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .noise import NoiseChannelSpec, kraus_operators
from .rng import as_generator

__all__ = [
    "GateOp", "apply_gate", "sample_kraus_trajectory", "sample_decimated_ensemble",
    "group_by_jump_code", "sample_measurement", "apply_readout_flips", "n_qubits_of",
    "TrajectoryGroup",
]

_UNITARY = {
    "H": np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}
GATE_KINDS = ("H", "X", "Y", "Z", "CNOT", "SWAP", "IDLE")


@dataclass(frozen=True)
class GateOp:
    """One circuit element. CNOT qubits are (control, target)."""

    kind: str
    qubits: tuple
    duration: float = 0.0
    p_dep: float = 0.0
    p_amp: float = 0.0
    p_phase: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        need = 2 if self.kind in ("CNOT", "SWAP") else 1
        if len(qs) != need or len(set(qs)) != need:
            raise ValueError(f"{self.kind} needs {need} distinct qubits, got {qs}")
        if self.duration < 0:
            raise ValueError("negative duration")
        object.__setattr__(self, "qubits", qs)

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in ("CNOT", "SWAP")


def n_qubits_of(state) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError("state length must be a power of two")
    return n


def apply_gate(state, gate: GateOp) -> np.ndarray:
    """Ideal action of ``gate`` (noise tags ignored; idle placeholders are no-ops)."""
    psi = np.array(state, dtype=np.complex128, copy=True)
    n_q = n_qubits_of(psi)
    if max(gate.qubits) >= n_q or min(gate.qubits) < 0:
        raise IndexError(f"qubit index out of range for n_q={n_q}")
    if gate.kind in _UNITARY:
        kernels.apply_1q(psi, gate.qubits[0], _UNITARY[gate.kind])
    elif gate.kind == "CNOT":
        kernels.apply_cnot(psi, *gate.qubits)
    elif gate.kind == "SWAP":
        kernels.apply_swap(psi, *gate.qubits)
    return psi


def _kraus_probs(psi, q, ops):
    p0, p1, coh = kernels.qubit_block(psi, q)
    rho = np.array([[p0, coh], [np.conj(coh), p1]])
    probs = np.array([np.real(np.trace(k @ rho @ k.conj().T)) for k in ops])
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_kraus_trajectory(state, channel: NoiseChannelSpec, rng):
    """Apply the channel to every qubit by sampling one Kraus branch per qubit.

    Returns (state, jump_code) where jump_code[q] is the chosen Kraus index.
    """
    gen = as_generator(rng)
    psi = np.array(state, dtype=np.complex128, copy=True)
    n_q = n_qubits_of(psi)
    ops = kraus_operators(channel)
    code = np.zeros(n_q, dtype=np.int8)
    if len(ops) == 1:
        return psi, code
    for q in range(n_q):
        probs = _kraus_probs(psi, q, ops)
        j = int(np.searchsorted(np.cumsum(probs), gen.random() * probs.sum(), side="right"))
        j = min(j, len(ops) - 1)
        assert probs[j] > 0.0, "selected a zero-probability Kraus branch"
        kernels.apply_1q(psi, q, ops[j])
        psi /= np.sqrt(probs[j])
        code[q] = j
    return psi, code


@dataclass
class TrajectoryGroup:
    code: tuple
    state: np.ndarray
    multiplicity: int


def group_by_jump_code(trajectories) -> list:
    """Collapse (state, code) pairs with equal codes into weighted groups."""
    groups = {}
    for psi, code in trajectories:
        key = tuple(int(c) for c in code)
        if key in groups:
            groups[key].multiplicity += 1
        else:
            groups[key] = TrajectoryGroup(key, psi, 1)
    return [groups[k] for k in sorted(groups)]


def sample_decimated_ensemble(state, channel: NoiseChannelSpec, n_mcs: int, rng) -> list:
    """Draw n_mcs trajectories already grouped by jump code.

    Trajectories sharing a code prefix share their state, so the draw is
    done qubit by qubit with multinomial splitting of the group counts.
    This has the same law as n_mcs independent calls to
    ``sample_kraus_trajectory`` followed by ``group_by_jump_code``.
    """
    if n_mcs < 1:
        raise ValueError("n_mcs must be >= 1")
    gen = as_generator(rng)
    psi0 = np.array(state, dtype=np.complex128, copy=True)
    n_q = n_qubits_of(psi0)
    ops = kraus_operators(channel)
    groups = [((), psi0, int(n_mcs))]
    if len(ops) == 1:
        return [TrajectoryGroup((0,) * n_q, psi0, int(n_mcs))]
    for q in range(n_q):
        nxt = []
        for code, psi, m in groups:
            probs = _kraus_probs(psi, q, ops)
            counts = gen.multinomial(m, probs)
            for j in np.flatnonzero(counts):
                child = psi if counts[j] == m else psi.copy()
                kernels.apply_1q(child, q, ops[j])
                child /= np.sqrt(probs[j])
                nxt.append((code + (int(j),), child, int(counts[j])))
        groups = nxt
    return [TrajectoryGroup(c, s, m) for c, s, m in sorted(groups, key=lambda g: g[0])]


def sample_measurement(state, shots: int, rng) -> np.ndarray:
    """i.i.d. computational-basis outcomes (integers) from |amplitude|^2."""
    gen = as_generator(rng)
    probs = np.abs(np.asarray(state)) ** 2
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    out = np.searchsorted(cdf, gen.random(int(shots)), side="right")
    return np.minimum(out, probs.size - 1).astype(np.int64)


def apply_readout_flips(outcomes, n_q: int, eps_r: float, rng) -> np.ndarray:
    """Flip each of the n_q bits independently with probability eps_r."""
    if not 0.0 <= eps_r <= 1.0:
        raise ValueError("eps_r must lie in [0, 1]")
    out = np.array(outcomes, dtype=np.int64, copy=True)
    if eps_r == 0.0:
        return out
    gen = as_generator(rng)
    flips = gen.random((out.size, n_q)) < eps_r
    weights = (1 << np.arange(n_q, dtype=np.int64))
    return out ^ (flips.astype(np.int64) @ weights).reshape(out.shape)
