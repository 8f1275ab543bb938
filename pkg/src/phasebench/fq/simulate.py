"""Trajectory simulation of the coherent protocol with jump-code decimation."""
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import CapExceededError
from ..noise import NoiseChannelSpec, phase_damping_flip_probability
from ..phase_states import BooleanFunction, Concept, build_phase_state
from ..rng import as_generator, as_source
from ..statevector import (
    TrajectoryGroup, apply_readout_flips, group_by_jump_code, sample_decimated_ensemble,
    sample_kraus_trajectory, sample_measurement,
)
from .circuit import apply_circuit, build_measurement_circuit, permute_outcomes, permute_state
from .devices import DeviceModel
from .routing import RoutedCircuit, route_circuit

__all__ = [
    "SimulationBudget", "FqResult", "CompiledOps", "compile_ops", "simulate_protocol",
    "decode_shots", "prep_ensemble", "sample_pauli_frames", "MAX_SIM_QUBITS",
]

MAX_SIM_QUBITS = 24

_KIND = {"H": kernels.OP_H, "X": kernels.OP_X, "Y": kernels.OP_Y, "Z": kernels.OP_Z,
         "CNOT": kernels.OP_CNOT, "IDLE": kernels.OP_IDLE}


@dataclass(frozen=True)
class SimulationBudget:
    n_functions: int = 1
    n_trajectories: int = 1
    n_shots: int = 1

    def __post_init__(self):
        for name in ("n_functions", "n_trajectories", "n_shots"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class FqResult:
    accuracy: float
    stderr: float
    per_function: np.ndarray
    n_unique: list


@dataclass
class CompiledOps:
    kinds: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    p_dep: np.ndarray
    p_amp: np.ndarray
    p_z: np.ndarray

    @property
    def n_ops(self) -> int:
        return int(self.kinds.size)

    @property
    def pauli_only(self) -> bool:
        return not np.any(self.p_amp > 0)


def compile_ops(ops) -> CompiledOps:
    n = len(ops)
    kinds = np.empty(n, dtype=np.int64)
    q0 = np.zeros(n, dtype=np.int64)
    q1 = np.zeros(n, dtype=np.int64)
    p_dep = np.zeros(n)
    p_amp = np.zeros(n)
    p_z = np.zeros(n)
    for k, g in enumerate(ops):
        if g.kind == "SWAP":
            raise ValueError("expand SWAPs before compiling")
        kinds[k] = _KIND[g.kind]
        q0[k] = g.qubits[0]
        q1[k] = g.qubits[1] if len(g.qubits) > 1 else -1
        p_dep[k] = g.p_dep
        p_amp[k] = g.p_amp
        p_z[k] = phase_damping_flip_probability(g.p_phase) if g.p_phase > 0 else 0.0
    return CompiledOps(kinds, q0, q1, p_dep, p_amp, p_z)


def sample_pauli_frames(ops: CompiledOps, n_shots: int, rng) -> np.ndarray:
    """X-part of the Pauli error accumulated at the end of a Clifford circuit, one per shot.

    Only valid for Pauli noise; Z-parts are tracked because H converts them.
    """
    gen = as_generator(rng)
    x = np.zeros(n_shots, dtype=np.int64)
    z = np.zeros(n_shots, dtype=np.int64)
    for k in range(ops.n_ops):
        kind = ops.kinds[k]
        a = int(ops.q0[k])
        if kind == kernels.OP_H:
            bx = (x >> a) & 1
            bz = (z >> a) & 1
            x ^= (bx ^ bz) << a
            z ^= (bx ^ bz) << a
        elif kind == kernels.OP_CNOT:
            t = int(ops.q1[k])
            x ^= ((x >> a) & 1) << t
            z ^= ((z >> t) & 1) << a
        if kind == kernels.OP_IDLE:
            if ops.p_z[k] > 0:
                z ^= (gen.random(n_shots) < ops.p_z[k]).astype(np.int64) << a
            continue
        p = ops.p_dep[k]
        if p <= 0:
            continue
        hit = np.flatnonzero(gen.random(n_shots) < p)
        if hit.size == 0:
            continue
        if kind == kernels.OP_CNOT:
            idx = gen.integers(1, 16, size=hit.size)
            pairs = ((idx % 4, a), (idx // 4, int(ops.q1[k])))
        else:
            pairs = ((gen.integers(1, 4, size=hit.size), a),)
        for pk, q in pairs:
            # Pauli index: 1 = X, 2 = Y, 3 = Z
            x[hit] ^= ((pk == 1) | (pk == 2)).astype(np.int64) << q
            z[hit] ^= ((pk == 3) | (pk == 2)).astype(np.int64) << q
    return x


def decode_shots(outcomes, f: BooleanFunction, alpha: int) -> np.ndarray:
    """Boolean array: does the read parity bit equal f(y) xor f(y xor alpha)."""
    z = np.asarray(outcomes, dtype=np.int64)
    top = f.n_q - 1
    y = z & ~(1 << top)
    b = (z >> top) & 1
    return b == (f.table[y] ^ f.table[y ^ int(alpha)])


def prep_ensemble(f: BooleanFunction, prep: NoiseChannelSpec, n_traj: int, rng, decimation="branching"):
    psi = build_phase_state(f)
    if prep.trivial:
        return [TrajectoryGroup((0,) * f.n_q, psi, int(n_traj))]
    if decimation == "branching":
        return sample_decimated_ensemble(psi, prep, n_traj, rng)
    gen = as_generator(rng)
    trajs = [sample_kraus_trajectory(psi, prep, gen) for _ in range(n_traj)]
    if decimation == "literal":
        return group_by_jump_code(trajs)
    if decimation == "none":
        return [TrajectoryGroup(tuple(int(c) for c in code), s, 1) for s, code in trajs]
    raise ValueError(f"unknown decimation mode {decimation!r}")


def _ideal_routed(n_q: int, alpha: Concept) -> RoutedCircuit:
    from .routing import RoutingStats

    gates = build_measurement_circuit(alpha)
    stats = RoutingStats(alpha.weight - 1, 1, 0, 0.0, 0.0, [])
    ident = tuple(range(n_q))
    return RoutedCircuit(n_q, gates, ident, ident, stats)


def simulate_protocol(functions, alpha, prep: NoiseChannelSpec, device: DeviceModel | None,
                      budget: SimulationBudget, rng, *, routed: RoutedCircuit | None = None,
                      routing_trials: int = 16, passive_idle: bool = True,
                      decimation: str = "branching", engine: str = "auto",
                      max_qubits: int = MAX_SIM_QUBITS) -> FqResult:
    """Accuracy of the coherent protocol averaged over functions, trajectories and shots.

    ``functions`` is a sequence of BooleanFunction or an int (that many are
    drawn from the random source). ``device=None`` runs the ideal circuit
    with perfect readout.
    """
    src = as_source(rng)
    if isinstance(functions, (int, np.integer)):
        from ..phase_states import random_function

        n_f = int(functions)
        if not isinstance(alpha, Concept):
            raise ValueError("alpha must be a Concept when functions are drawn here")
        functions = [random_function(alpha.n_q, src.child(1_000_000, i)) for i in range(n_f)]
    functions = list(functions)
    if not functions:
        raise ValueError("no functions to simulate")
    n_q = functions[0].n_q
    if n_q > max_qubits:
        raise CapExceededError(f"n_q={n_q} exceeds the statevector cap {max_qubits}")
    if not isinstance(alpha, Concept):
        alpha = Concept(int(alpha), n_q)
    if device is None:
        routed = routed or _ideal_routed(n_q, alpha)
        eps_r = 0.0
    else:
        if routed is None:
            routed = route_circuit(build_measurement_circuit(alpha), device, n_q, routing_trials,
                                   src.child(2_000_000), passive_idle)
        eps_r = device.eps_r
    ops = compile_ops(routed.ops)
    noisy_circuit = bool(np.any(ops.p_dep > 0) or np.any(ops.p_amp > 0) or np.any(ops.p_z > 0))
    if engine == "auto":
        engine = "frames" if ops.pauli_only else "statevector"
    if engine == "frames" and not ops.pauli_only:
        raise ValueError("the Pauli-frame engine needs Pauli-only circuit noise")
    ideal_gates = [g for g in routed.ops if g.kind != "IDLE"]

    per_f = np.empty(len(functions))
    n_unique = []
    n_shots = budget.n_shots
    for i, f in enumerate(functions):
        s_i = src.child(i)
        groups = prep_ensemble(f, prep, budget.n_trajectories, s_i.child(0), decimation)
        n_unique.append(len(groups))
        shot_gen = s_i.child(1).generator()
        outs = []
        for grp in groups:
            phys = permute_state(grp.state, routed.initial_layout)
            if engine == "statevector" and noisy_circuit:
                outs.append(_statevector_shots(phys, ops, n_shots, shot_gen))
            else:
                outs.append(sample_measurement(apply_circuit(phys, ideal_gates), n_shots, shot_gen))
        z = np.concatenate(outs)
        if engine == "frames" and noisy_circuit:
            z ^= sample_pauli_frames(ops, z.size, s_i.child(2))
        if eps_r > 0:
            z = apply_readout_flips(z, n_q, eps_r, s_i.child(3))
        ok = decode_shots(permute_outcomes(z, routed.final_layout), f, alpha.alpha)
        a_u = ok.reshape(len(groups), n_shots).mean(axis=1)
        m_u = np.array([g.multiplicity for g in groups], dtype=float)
        per_f[i] = float(np.dot(m_u, a_u) / m_u.sum())
    acc = float(per_f.mean())
    if per_f.size > 1:
        se = float(per_f.std(ddof=1) / np.sqrt(per_f.size))
    else:
        se = float(np.sqrt(max(acc * (1 - acc), 1e-300) / (budget.n_trajectories * n_shots)))
    return FqResult(acc, se, per_f, n_unique)


def _statevector_shots(psi, ops: CompiledOps, n_shots: int, gen) -> np.ndarray:
    out = np.empty(n_shots, dtype=np.int64)
    for s in range(n_shots):
        work = psi.copy()
        uni = gen.random((ops.n_ops, 2))
        kernels.run_noisy_ops(work, ops.kinds, ops.q0, ops.q1, ops.p_dep, ops.p_amp, ops.p_z, uni)
        out[s] = sample_measurement(work, 1, gen)[0]
    return out
