"""Hypergraph (ANF) learner from separable X/Z measurements with frequency-sorted GF(2) elimination."""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..bits import popcount
from ..gf2 import Gf2Matrix, gf2_eliminate, n_words_for
from ..noise import NoiseChannelSpec, attenuation, kraus_operators, noisy_diagonal
from ..phase_states import BooleanFunction, Concept, random_function
from ..rng import as_generator, as_source

__all__ = [
    "SeparableRecords", "PooledSystem", "HypergraphResult", "CriticalBudget",
    "separable_distribution", "sample_separable", "assemble_pooled_system",
    "solve_with_frequency_sorting", "critical_budget", "monomial_order",
    "task_accuracy", "run_hypergraph", "valid_outcome",
]


@dataclass
class SeparableRecords:
    """Distinct outcomes of configuration ``l`` (qubit l read in X, the rest in Z) with counts."""

    l: int
    n_q: int
    outcomes: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if not 0 <= self.l < self.n_q:
            raise ValueError("configuration index out of range")
        self.outcomes = np.asarray(self.outcomes, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.outcomes.shape != self.counts.shape:
            raise ValueError("outcomes and counts must align")
        if np.any(self.counts < 1):
            raise ValueError("counts must be >= 1")

    @property
    def shots(self) -> int:
        return int(self.counts.sum())


def valid_outcome(f: BooleanFunction, l: int, s) -> np.ndarray:
    """s_l equals the derivative of f along qubit l at the spectator bits of s."""
    s = np.asarray(s, dtype=np.int64)
    lb = 1 << l
    y = s & ~lb
    return ((s >> l) & 1) == (f.table[y] ^ f.table[y | lb])


def _spectator_transfer(prep: NoiseChannelSpec) -> np.ndarray:
    """2x2 map on populations of one qubit: T[a, c] = sum_k |K_ac|^2."""
    t = np.zeros((2, 2))
    for k in kraus_operators(prep):
        t += np.abs(k) ** 2
    return t


def separable_distribution(f: BooleanFunction, prep: NoiseChannelSpec, l: int) -> np.ndarray:
    """Exact outcome probabilities of configuration l on the noisy phase state.

    For each spectator string the qubit-l X readout only sees the 2x2 block
    {y, y | 2^l}; its populations and coherence follow from per-qubit
    transfer maps, which is exact for phase-covariant channels.
    """
    n_q = f.n_q
    if not 0 <= l < n_q:
        raise ValueError("configuration index out of range")
    lb = 1 << l
    dim = 1 << n_q
    idx = np.arange(dim)
    low = idx[(idx & lb) == 0]
    sgn = f.signs.astype(float)
    coh = np.zeros(dim)
    coh[low] = sgn[low] * sgn[low | lb] / dim
    tr = _spectator_transfer(prep)
    if not prep.trivial:
        for j in range(n_q):
            if j == l:
                continue
            jb = 1 << j
            zero = low[(low & jb) == 0]
            c0 = coh[zero].copy()
            c1 = coh[zero | jb].copy()
            coh[zero] = tr[0, 0] * c0 + tr[0, 1] * c1
            coh[zero | jb] = tr[1, 0] * c0 + tr[1, 1] * c1
        coh *= attenuation(prep).gamma_act
    pops = noisy_diagonal(prep, n_q)
    mass = pops[low] + pops[low | lb]
    probs = np.zeros(dim)
    probs[low] = 0.5 * mass + coh[low]
    probs[low | lb] = 0.5 * mass - coh[low]
    return np.clip(probs, 0.0, None) / np.clip(probs, 0.0, None).sum()


def sample_separable(f: BooleanFunction, prep: NoiseChannelSpec, l: int, shots: int, rng) -> SeparableRecords:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = separable_distribution(f, prep, l)
    counts = as_generator(rng).multinomial(int(shots), p)
    nz = np.flatnonzero(counts)
    return SeparableRecords(l, f.n_q, nz, counts[nz])


def monomial_order(n_q: int) -> np.ndarray:
    """Monomials (as bit masks) sorted by degree, then by index."""
    e = np.arange(1 << n_q)
    return e[np.lexsort((e, popcount(e)))]


@dataclass
class PooledSystem:
    matrix: Gf2Matrix
    rhs: np.ndarray
    freqs: np.ndarray
    outcomes: np.ndarray
    configs: np.ndarray
    columns: np.ndarray  # monomial mask of every column

    @property
    def n_rows(self) -> int:
        return self.matrix.n_rows


def assemble_pooled_system(records, n_q: int) -> PooledSystem:
    """One GF(2) row per distinct (l, s): ones at monomials e with e_l = 1 and e contained in s | 2^l."""
    records = list(records)
    if not records:
        raise ValueError("need records from at least one configuration")
    ls = np.concatenate([np.full(r.outcomes.size, r.l, dtype=np.int64) for r in records])
    ss = np.concatenate([r.outcomes for r in records])
    freqs = np.concatenate([r.counts for r in records])
    cols = monomial_order(n_q)
    col_pos = np.empty(1 << n_q, dtype=np.int64)
    col_pos[cols] = np.arange(cols.size)
    words = kernels.hypergraph_rows(ls, ss, col_pos, n_words_for(cols.size))
    rhs = ((ss >> ls) & 1).astype(np.uint8)
    return PooledSystem(Gf2Matrix(words, cols.size), rhs, freqs, ss, ls, cols)


@dataclass
class HypergraphResult:
    function: BooleanFunction
    monomials: np.ndarray
    rank: int
    kept_rows: int
    discarded_rows: int
    order: np.ndarray = field(repr=False, default=None)


def _priority(system: PooledSystem) -> np.ndarray:
    # descending frequency, then outcome string, then configuration
    return np.lexsort((system.configs, system.outcomes, -system.freqs))


def solve_with_frequency_sorting(system: PooledSystem, n_q: int) -> HypergraphResult:
    order = _priority(system)
    sol = gf2_eliminate(system.matrix, system.rhs, order)
    mono = np.sort(system.columns[sol.solution.astype(bool)])
    f_hat = BooleanFunction.from_anf(mono, n_q)
    return HypergraphResult(f_hat, mono, sol.rank, int(sol.pivot_rows.size),
                            int(sol.redundant_rows.size + sol.inconsistent_rows.size), order)


def task_accuracy(f_hat: BooleanFunction, f: BooleanFunction, alpha) -> float:
    """Fraction of y (control bit clear) whose parity f(y) ^ f(y ^ alpha) the estimate gets right."""
    a = alpha.alpha if isinstance(alpha, Concept) else int(alpha)
    y = np.arange(1 << (f.n_q - 1))
    return float(np.mean((f_hat.table[y] ^ f_hat.table[y ^ a]) == (f.table[y] ^ f.table[y ^ a])))


def same_up_to_constant(f_hat: BooleanFunction, f: BooleanFunction) -> bool:
    """The constant monomial never enters a row, so f and its complement are indistinguishable."""
    d = f_hat.table ^ f.table
    return bool(np.all(d == d[0]))


def run_hypergraph(f: BooleanFunction, prep: NoiseChannelSpec, kappa: int, rng):
    """Sample every configuration with kappa shots, solve, return (result, exact, records)."""
    src = as_source(rng)
    recs = [sample_separable(f, prep, l, kappa, src.child(l)) for l in range(f.n_q)]
    res = solve_with_frequency_sorting(assemble_pooled_system(recs, f.n_q), f.n_q)
    return res, same_up_to_constant(res.function, f), recs


@dataclass(frozen=True)
class CriticalBudget:
    kind: str
    kappa_crit: object  # float, or array over spectator strings
    kappa_max: float
    m_star: int | None = None


def critical_budget(channel: NoiseChannelSpec, n_q: int, f: BooleanFunction | None = None, l: int = 0) -> CriticalBudget:
    """Shots per configuration at which valid equations emerge from the noise floor.

    With ``f`` the relaxation budget is evaluated per spectator string of
    configuration ``l``; without it only the adversarial worst case is given.
    """
    eps = channel.epsilon_p
    if not 0.0 <= eps < 1.0:
        raise ValueError("epsilon_p must lie in [0, 1)")
    base = 2.0 ** (n_q - 1)
    if channel.kind == "dephasing":
        k = base / (1.0 - eps) ** 2
        return CriticalBudget("dephasing", k, k)
    if channel.kind == "depolarizing":
        c = 1.0 - 4.0 * eps / 3.0
        kmax = math.inf if c == 0 else base / c ** (2 * n_q)
        per = None
        if f is not None:
            per = base / (c ** 2 * _filtered_derivative(f, l, c) ** 2)
        return CriticalBudget("depolarizing", per if per is not None else kmax, kmax)
    c_rel = math.sqrt(1.0 - eps)
    m = np.arange(n_q)
    den = eps * (1 + eps) ** m / 2 + c_rel * (2 - (1 + eps) ** m)
    m_star = int(np.argmin(np.abs(den)))
    d = den[m_star]
    if d == 0:
        kmax = math.inf
    else:
        kmax = (2.0 ** (n_q - 2) * (2 + eps) * (1 + eps) ** m_star
                / ((1 - eps) ** (n_q - 1 - m_star) * d ** 2))
    per = kmax
    if f is not None:
        per = _relaxation_per_string(f, l, eps)
    return CriticalBudget("relaxation", per, kmax, m_star)


def _spectators(n_q: int, l: int) -> np.ndarray:
    idx = np.arange(1 << n_q)
    return idx[(idx & (1 << l)) == 0]


def _filtered_derivative(f: BooleanFunction, l: int, c: float) -> np.ndarray:
    """Walsh spectrum of (-1)^{D_l f} damped by c^|k|, evaluated back on every spectator string."""
    n = f.n_q
    lb = 1 << l
    y = _spectators(n, l)
    v = (1.0 - 2.0 * (f.table[y] ^ f.table[y | lb])).astype(float)
    m = n - 1
    kernels.fwht_masked(v, (1 << m) - 1)
    v /= 1 << m
    v *= c ** popcount(np.arange(1 << m))
    kernels.fwht_masked(v, (1 << m) - 1)
    return v


def _relaxation_per_string(f: BooleanFunction, l: int, eps: float) -> np.ndarray:
    n = f.n_q
    lb = 1 << l
    y = _spectators(n, l)
    nu = y | lb
    full = (1 << n) - 1
    c_rel = math.sqrt(1.0 - eps)
    sgn = (1.0 - 2.0 * f.table).astype(float)
    w_s = popcount(y)
    m = n - 1 - w_s
    out = np.empty(y.size)
    for i, (yy, vv) in enumerate(zip(y, nu)):
        free = full & ~(int(yy) | int(vv))
        tot = 0.0
        k = free
        while True:
            tot += sgn[yy ^ k] * sgn[vv ^ k] * eps ** bin(k).count("1")
            if k == 0:
                break
            k = (k - 1) & free
        d0 = 1 - 2 * (int(f.table[yy]) ^ int(f.table[vv]))
        den = eps * d0 * (1 + eps) ** m[i] / 2 + c_rel * tot
        num = 2.0 ** (n - 2) * (2 + eps) * (1 + eps) ** m[i]
        out[i] = math.inf if den == 0 else num / ((1 - eps) ** w_s[i] * den ** 2)
    return out


def random_functions(n_q: int, count: int, rng):
    src = as_source(rng)
    return [random_function(n_q, src.child(i)) for i in range(count)]
