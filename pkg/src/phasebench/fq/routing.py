"""Lookahead SWAP routing onto a coupling graph, ASAP scheduling and idle bookkeeping."""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..noise import idle_probabilities
from ..rng import as_generator
from ..statevector import GateOp
from .devices import DeviceModel

__all__ = [
    "RoutedCircuit", "RoutingStats", "route_circuit", "schedule_circuit",
    "check_adjacency", "routing_stats_rows", "write_routing_csv", "MIN_IDLE_FRACTION",
]

MIN_IDLE_FRACTION = 1e-4


@dataclass
class RoutingStats:
    two_qubit: int
    one_qubit: int
    swaps: int
    total_idle: float
    duration: float
    delays: list = field(default_factory=list)


@dataclass
class RoutedCircuit:
    """Physical op list (gates plus idle placeholders) and the qubit maps.

    ``initial_layout[i]`` / ``final_layout[i]`` give the physical position of
    logical qubit i before and after the circuit.
    """

    n_q: int
    ops: list
    initial_layout: tuple
    final_layout: tuple
    stats: RoutingStats

    @property
    def gates(self) -> list:
        return [g for g in self.ops if g.kind != "IDLE"]


def _commute(a: GateOp, b: GateOp) -> bool:
    if a.kind != "CNOT" or b.kind != "CNOT":
        return False
    ca, ta = a.qubits
    cb, tb = b.qubits
    return (ca == cb and ta != tb) or (ta == tb and ca != cb)


def _dependencies(gates):
    preds = [set() for _ in gates]
    for j, gj in enumerate(gates):
        for i in range(j):
            gi = gates[i]
            if set(gi.qubits) & set(gj.qubits) and not _commute(gi, gj):
                preds[j].add(i)
    succ = [[] for _ in gates]
    for j, ps in enumerate(preds):
        for i in ps:
            succ[i].append(j)
    return preds, succ


class _Router:
    def __init__(self, gates, dist, edges, gen, lookahead=20, weight=0.5, decay_delta=0.001):
        self.gates = gates
        self.dist = dist
        self.gen = gen
        self.lookahead = lookahead
        self.weight = weight
        self.decay_delta = decay_delta
        n = dist.shape[0]
        self.nbrs = [[] for _ in range(n)]
        for a, b in edges:
            self.nbrs[a].append(b)
            self.nbrs[b].append(a)
        self.preds, self.succ = _dependencies(gates)

    def run(self, layout):
        n = self.dist.shape[0]
        l2p = np.array(layout, dtype=np.int64)
        p2l = np.empty(n, dtype=np.int64)
        p2l[l2p] = np.arange(n)
        missing = [len(p) for p in self.preds]
        front = [j for j, m in enumerate(missing) if m == 0]
        out = []
        decay = np.ones(n)
        stall = 0
        stall_limit = 4 * n + 10
        while front:
            done = []
            for j in front:
                g = self.gates[j]
                if len(g.qubits) == 1 or self.dist[l2p[g.qubits[0]], l2p[g.qubits[1]]] == 1:
                    done.append(j)
            if done:
                for j in done:
                    g = self.gates[j]
                    out.append(("gate", j, tuple(int(l2p[q]) for q in g.qubits)))
                    front.remove(j)
                    for k in self.succ[j]:
                        missing[k] -= 1
                        if missing[k] == 0:
                            front.append(k)
                front.sort()
                decay[:] = 1.0
                stall = 0
                continue
            if stall > stall_limit:
                # heuristic is cycling: walk the first blocked gate's control along a shortest path
                g = self.gates[front[0]]
                pa, pb = int(l2p[g.qubits[0]]), int(l2p[g.qubits[1]])
                while self.dist[pa, pb] > 1:
                    nxt = min(self.nbrs[pa], key=lambda v: (self.dist[v, pb], v))
                    self._swap(pa, nxt, l2p, p2l, out)
                    pa = nxt
                stall = 0
                continue
            a, b = self._choose_swap(front, l2p, decay)
            self._swap(a, b, l2p, p2l, out)
            decay[a] += self.decay_delta
            decay[b] += self.decay_delta
            stall += 1
        return out, l2p

    @staticmethod
    def _swap(a, b, l2p, p2l, out):
        la, lb = p2l[a], p2l[b]
        p2l[a], p2l[b] = lb, la
        l2p[la], l2p[lb] = b, a
        out.append(("swap", a, b))

    def _extended(self, front):
        ext = []
        seen = set(front)
        queue = list(front)
        while queue and len(ext) < self.lookahead:
            j = queue.pop(0)
            for k in self.succ[j]:
                if k in seen:
                    continue
                seen.add(k)
                queue.append(k)
                if len(self.gates[k].qubits) == 2:
                    ext.append(k)
                    if len(ext) >= self.lookahead:
                        break
        return ext

    def _choose_swap(self, front, l2p, decay):
        f_pairs = [self.gates[j].qubits for j in front if len(self.gates[j].qubits) == 2]
        e_pairs = [self.gates[j].qubits for j in self._extended(front)]
        cand = set()
        for lq in {q for pair in f_pairs for q in pair}:
            p = int(l2p[lq])
            for v in self.nbrs[p]:
                cand.add((min(p, v), max(p, v)))
        cand = sorted(cand)
        best = math.inf
        ties = []
        for a, b in cand:
            trial = l2p.copy()
            trial[l2p == a] = b
            trial[l2p == b] = a
            h = sum(self.dist[trial[x], trial[y]] for x, y in f_pairs) / len(f_pairs)
            if e_pairs:
                h += self.weight * sum(self.dist[trial[x], trial[y]] for x, y in e_pairs) / len(e_pairs)
            h *= max(decay[a], decay[b])
            if h < best - 1e-12:
                best = h
                ties = [(a, b)]
            elif abs(h - best) <= 1e-12:
                ties.append((a, b))
        return ties[int(self.gen.integers(len(ties)))]


def _expand(gates, events):
    phys = []
    for ev in events:
        if ev[0] == "gate":
            phys.append(GateOp(gates[ev[1]].kind, ev[2]))
        else:
            a, b = ev[1], ev[2]
            phys += [GateOp("CNOT", (a, b)), GateOp("CNOT", (b, a)), GateOp("CNOT", (a, b))]
    return phys


def schedule_circuit(phys_gates, n_q: int, device: DeviceModel, passive_idle: bool = True,
                     min_idle_fraction: float = MIN_IDLE_FRACTION):
    """ASAP schedule; returns ops with noise tags and idle placeholders, plus (total_idle, duration, delays).

    Delays before a qubit's first gate and between its gates are kept,
    delays after its last gate are pruned, and qubits that no gate touches
    idle for the whole circuit when ``passive_idle`` is set.
    """
    eps_1q, eps_2q = device.gate_errors
    clock = np.zeros(n_q)
    touched = np.zeros(n_q, dtype=bool)
    timed = []
    for g in phys_gates:
        dur = device.t_2q if g.is_two_qubit else device.t_1q
        start = max(clock[q] for q in g.qubits)
        for q in g.qubits:
            if start - clock[q] > 0:
                timed.append((start, 0, q, start - clock[q]))
            clock[q] = start + dur
            touched[q] = True
        p = eps_2q * 15.0 / 16.0 if g.is_two_qubit else eps_1q * 0.75
        timed.append((start, 1, len(timed), GateOp(g.kind, g.qubits, dur, p_dep=p)))
    duration = float(clock.max()) if len(phys_gates) else 0.0
    if passive_idle:
        for q in range(n_q):
            if not touched[q] and duration > 0:
                timed.append((0.0, 0, q, duration))
    ops = []
    delays = []
    # idles sort before the gate that starts when they end
    for item in sorted(timed, key=lambda e: (e[0], e[1], e[2])):
        if item[1] == 1:
            ops.append(item[3])
            continue
        q, t = item[2], item[3]
        if math.isinf(device.quality):
            delays.append(t)
            continue
        if t / device.quality < min_idle_fraction:
            continue
        delays.append(t)
        p_amp, p_phase = idle_probabilities(device.idle_spec(t))
        ops.append(GateOp("IDLE", (q,), t, p_amp=p_amp, p_phase=p_phase))
    return ops, float(sum(delays)), duration, delays


def check_adjacency(routed: RoutedCircuit, device: DeviceModel) -> bool:
    edges = {frozenset(e) for e in device.coupling_edges(routed.n_q)}
    return all(frozenset(g.qubits) in edges for g in routed.ops if g.is_two_qubit)


def route_circuit(logical, device: DeviceModel, n_q: int, trials: int = 16, rng=0,
                  passive_idle: bool = True) -> RoutedCircuit:
    """Route ``logical`` onto the device; keep the attempt with the fewest two-qubit gates.

    Each attempt starts from a random layout (the first from the identity)
    refined by one forward-backward sweep, then a final forward pass.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gates = list(logical)
    if any(max(g.qubits) >= n_q for g in gates):
        raise ValueError("gate acts outside the register")
    dist = device.distance_matrix(n_q)
    edges = device.coupling_edges(n_q)
    gen = as_generator(rng)
    needs_routing = any(g.is_two_qubit and dist[g.qubits[0], g.qubits[1]] != 1 for g in gates)
    if device.connectivity == "all-to-all" or not needs_routing:
        best_events = [("gate", j, g.qubits) for j, g in enumerate(gates)]
        layout = final = np.arange(n_q)
        swaps = 0
    else:
        router = _Router(gates, dist, edges, gen)
        reverse = _Router(gates[::-1], dist, edges, gen)
        best = None
        for trial in range(trials):
            start = np.arange(n_q) if trial == 0 else gen.permutation(n_q)
            _, mid = router.run(start)
            _, refined = reverse.run(mid)
            events, final_l2p = router.run(refined)
            n_swaps = sum(1 for e in events if e[0] == "swap")
            if best is None or n_swaps < best[0]:
                best = (n_swaps, events, refined.copy(), final_l2p.copy())
        swaps, best_events, layout, final = best
    phys = _expand(gates, best_events)
    ops, total_idle, duration, delays = schedule_circuit(phys, n_q, device, passive_idle)
    stats = RoutingStats(
        two_qubit=sum(1 for g in phys if g.is_two_qubit),
        one_qubit=sum(1 for g in phys if not g.is_two_qubit),
        swaps=int(swaps),
        total_idle=total_idle,
        duration=duration,
        delays=delays,
    )
    return RoutedCircuit(n_q, ops, tuple(int(x) for x in layout), tuple(int(x) for x in final), stats)


def routing_stats_rows(device: DeviceModel, n_q_values, alpha_rule="full", trials=16, seed=0):
    from ..phase_states import concept_for_rule
    from ..rng import RandomSource
    from .circuit import build_measurement_circuit

    rows = []
    for n_q in n_q_values:
        alpha = concept_for_rule(n_q, alpha_rule)
        rc = route_circuit(build_measurement_circuit(alpha), device, n_q, trials,
                           RandomSource(seed, (n_q,)))
        rows.append({
            "n_q": n_q, "alpha_weight": alpha.weight, "two_qubit": rc.stats.two_qubit,
            "one_qubit": rc.stats.one_qubit, "total_idle_over_t2q": rc.stats.total_idle / device.t_2q,
        })
    return rows


def write_routing_csv(path, rows):
    cols = ["n_q", "alpha_weight", "two_qubit", "one_qubit", "total_idle_over_t2q"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)
