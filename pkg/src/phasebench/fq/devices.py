"""Hardware profiles for the measurement circuit."""
import math
from dataclasses import dataclass, replace

import numpy as np

from ..noise import IdleNoiseSpec, gate_error_params

__all__ = ["DeviceModel", "PRESETS", "get_preset", "lattice_shape"]


def lattice_shape(n_q: int, rows=None, cols=None):
    if rows is None and cols is None:
        cols = math.isqrt(n_q - 1) + 1 if n_q > 1 else 1
        rows = -(-n_q // cols)
    elif rows is None:
        rows = -(-n_q // cols)
    elif cols is None:
        cols = -(-n_q // rows)
    if rows * cols < n_q:
        raise ValueError(f"a {rows}x{cols} lattice cannot hold {n_q} qubits")
    return int(rows), int(cols)


@dataclass(frozen=True)
class DeviceModel:
    """Connectivity, gate fidelities, idle quality factor and readout error of a backend.

    Times are in units of the two-qubit gate duration. ``idle_kind`` is
    "T1" (amplitude damping only, T2 = 2 T1) or "T2" (pure dephasing, T1 infinite);
    ``quality`` is the relevant idle time constant.
    """

    name: str
    connectivity: str = "all-to-all"
    f_1q: float = 1.0
    f_2q: float = 1.0
    idle_kind: str = "T2"
    quality: float = math.inf
    eps_r: float = 0.0
    t_1q: float = 0.1
    t_2q: float = 1.0
    rows: int | None = None
    cols: int | None = None

    def __post_init__(self):
        if self.connectivity not in ("all-to-all", "square"):
            raise ValueError(f"unknown connectivity {self.connectivity!r}")
        for f in (self.f_1q, self.f_2q):
            if not 0.0 < f <= 1.0:
                raise ValueError("fidelities must lie in (0, 1]")
        if self.idle_kind not in ("T1", "T2"):
            raise ValueError("idle_kind must be 'T1' or 'T2'")
        if not self.quality > 0:
            raise ValueError("quality must be positive")
        if not 0.0 <= self.eps_r <= 0.5:
            raise ValueError("eps_r must lie in [0, 1/2]")
        if self.t_1q < 0 or self.t_2q <= 0:
            raise ValueError("bad gate durations")

    @property
    def gate_errors(self):
        return gate_error_params(self.f_1q, self.f_2q)

    @property
    def pauli_only(self) -> bool:
        """True when every circuit noise source is a Pauli mixture."""
        return self.idle_kind == "T2" or math.isinf(self.quality)

    @property
    def noiseless(self) -> bool:
        return self.f_1q == 1.0 and self.f_2q == 1.0 and math.isinf(self.quality) and self.eps_r == 0.0

    def idle_spec(self, duration: float) -> IdleNoiseSpec:
        if self.idle_kind == "T1":
            return IdleNoiseSpec(self.quality, 2.0 * self.quality, duration)
        return IdleNoiseSpec(math.inf, self.quality, duration)

    def coupling_edges(self, n_q: int) -> list:
        if self.connectivity == "all-to-all":
            return [(a, b) for a in range(n_q) for b in range(a + 1, n_q)]
        rows, cols = lattice_shape(n_q, self.rows, self.cols)
        edges = []
        for k in range(n_q):
            r, c = divmod(k, cols)
            if c + 1 < cols and k + 1 < n_q:
                edges.append((k, k + 1))
            if r + 1 < rows and k + cols < n_q:
                edges.append((k, k + cols))
        return edges

    def distance_matrix(self, n_q: int) -> np.ndarray:
        """All-pairs hop distances on the first n_q nodes (BFS)."""
        adj = [[] for _ in range(n_q)]
        for a, b in self.coupling_edges(n_q):
            adj[a].append(b)
            adj[b].append(a)
        dist = np.full((n_q, n_q), -1, dtype=np.int64)
        for s in range(n_q):
            dist[s, s] = 0
            frontier = [s]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in adj[u]:
                        if dist[s, v] < 0:
                            dist[s, v] = dist[s, u] + 1
                            nxt.append(v)
                frontier = nxt
        if np.any(dist < 0):
            raise ValueError("device graph restricted to n_q nodes is disconnected")
        return dist

    def with_overrides(self, **kw) -> "DeviceModel":
        return replace(self, **kw)


PRESETS = {
    "A": DeviceModel("A", "all-to-all", 0.9999, 0.99, "T2", 1e6, 1e-3),
    "B": DeviceModel("B", "square", 0.9999, 0.999, "T1", 2e3, 1e-3),
    "C": DeviceModel("C", "square", 0.9999, 0.99, "T2", 2e2, 1e-2),
    "ideal": DeviceModel("ideal", "all-to-all"),
}


def get_preset(name: str) -> DeviceModel:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown device preset {name!r}; known: {sorted(PRESETS)}") from None
