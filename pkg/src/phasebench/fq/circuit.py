"""Logical measurement circuit and qubit-permutation helpers."""
import numpy as np

from ..phase_states import Concept
from ..statevector import GateOp

__all__ = ["build_measurement_circuit", "permute_state", "permute_outcomes", "apply_circuit"]


def build_measurement_circuit(alpha, n_q: int | None = None) -> list:
    """CNOTs from the control (top) qubit onto every other active qubit, then H on the control."""
    if not isinstance(alpha, Concept):
        if n_q is None:
            raise ValueError("n_q is required when alpha is an integer")
        alpha = Concept(int(alpha), n_q)
    ctrl = alpha.control
    gates = [GateOp("CNOT", (ctrl, t)) for t in alpha.targets]
    gates.append(GateOp("H", (ctrl,)))
    return gates


def apply_circuit(state, gates) -> np.ndarray:
    from ..statevector import apply_gate

    psi = np.asarray(state, dtype=np.complex128)
    for g in gates:
        if g.kind != "IDLE":
            psi = apply_gate(psi, g)
    return psi


def permute_state(state, layout) -> np.ndarray:
    """Move logical qubit i to physical position layout[i]."""
    psi = np.asarray(state)
    n_q = len(layout)
    idx = np.arange(1 << n_q)
    phys = np.zeros_like(idx)
    for i, p in enumerate(layout):
        phys |= ((idx >> i) & 1) << int(p)
    out = np.empty_like(psi)
    out[phys] = psi
    return out


def permute_outcomes(outcomes, layout) -> np.ndarray:
    """Physical outcome integers -> logical ones, where logical i sits at layout[i]."""
    z = np.asarray(outcomes, dtype=np.int64)
    out = np.zeros_like(z)
    for i, p in enumerate(layout):
        out |= ((z >> int(p)) & 1) << i
    return out
