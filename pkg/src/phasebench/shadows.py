"""Local-Clifford classical shadows and the Gaussian surrogate of the reconstructed matrix.

Conventions: basis index b is 0 = X, 1 = Y, 2 = Z; a snapshot label on one
qubit is 2 * b + outcome, and its inverted single-qubit factor is
3 |s><s| - I with |s> = H|o> (X), S H|o> (Y) or |o> (Z).
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bits import popcount
from .errors import CapExceededError
from .noise import NoiseChannelSpec, apply_channel_to_density, attenuation, kraus_operators, noisy_diagonal
from .phase_states import BooleanFunction, Concept, build_phase_state
from .rng import as_generator

__all__ = [
    "SNAPSHOT_FACTORS", "explicit_shadow_estimate", "shadow_label_counts", "reconstruct_from_counts",
    "element_variance", "SurrogateSectorSample", "sample_surrogate", "surrogate_mean_matrix",
    "diag_covariance", "offdiag_block_covariance", "sample_surrogate_dense", "noisy_density_matrix",
    "trace_distance", "surrogate_vs_truth_report", "MAX_EXPLICIT_QUBITS", "MAX_FULL_QUBITS",
    "MAX_SECTOR_QUBITS",
]

MAX_EXPLICIT_QUBITS = 8
MAX_FULL_QUBITS = 12
MAX_SECTOR_QUBITS = 16

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
_S = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
# rotations applied before a Z readout, per basis
_ROT = (_H, _H @ _S.conj().T, np.eye(2, dtype=np.complex128))


def _snapshot_factors():
    out = np.empty((6, 2, 2), dtype=np.complex128)
    for b, u in enumerate(_ROT):
        for o in range(2):
            s = u.conj().T[:, o]
            out[2 * b + o] = 3.0 * np.outer(s, s.conj()) - np.eye(2)
    return out


SNAPSHOT_FACTORS = _snapshot_factors()


def _as_columns(state):
    """Weighted pure components: (weights, matrix of column vectors)."""
    a = np.asarray(state, dtype=np.complex128)
    if a.ndim == 1:
        return np.ones(1), a[:, None].copy()
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    keep = w > 1e-14
    return w[keep], v[:, keep].copy()


def shadow_label_counts(state, n_c: int, rng) -> np.ndarray:
    """Histogram over the 6^n snapshot labels for n_c random-basis shots.

    Axis k of the returned tensor is qubit n - 1 - k. Shots are split over
    the 3^n basis settings by one multinomial draw; each setting's outcome
    probabilities come from rotating the state one qubit at a time.
    """
    if n_c < 1:
        raise ValueError("n_c must be >= 1")
    gen = as_generator(rng)
    weights, cols = _as_columns(state)
    dim = cols.shape[0]
    n_q = dim.bit_length() - 1
    if n_q > MAX_EXPLICIT_QUBITS:
        raise CapExceededError(f"explicit shadows are capped at {MAX_EXPLICIT_QUBITS} qubits")
    per_setting = gen.multinomial(int(n_c), np.full(3 ** n_q, 3.0 ** -n_q))
    counts = np.zeros(6 ** n_q, dtype=np.int64)
    stack = [(n_q - 1, cols, 0, 0)]
    while stack:
        q, vecs, setting, label_base = stack.pop()
        if q < 0:
            m = per_setting[setting]
            if m == 0:
                continue
            probs = (np.abs(vecs) ** 2) @ weights
            probs = np.clip(probs, 0, None)
            outs = gen.multinomial(m, probs / probs.sum())
            hit = np.flatnonzero(outs)
            lab = np.full(hit.size, label_base, dtype=np.int64)
            for qq in range(n_q):
                lab += ((hit >> qq) & 1) * 6 ** qq
            np.add.at(counts, lab, outs[hit])
            continue
        for b in range(3):
            rotated = vecs.copy()
            for j in range(rotated.shape[1]):
                kernels.apply_1q(rotated[:, j], q, _ROT[b])
            stack.append((q - 1, rotated, setting * 3 + b, label_base + 2 * b * 6 ** q))
    # label index sum_q L_q 6^q -> tensor with axis k = qubit n-1-k
    return counts.reshape((6,) * n_q)


def reconstruct_from_counts(counts, n_c=None, factors=SNAPSHOT_FACTORS) -> np.ndarray:
    """Mean of the inverted snapshots given a label histogram."""
    t = np.asarray(counts, dtype=np.complex128)
    n_q = t.ndim
    total = float(np.real(t.sum())) if n_c is None else float(n_c)
    for _ in range(n_q):
        t = np.tensordot(t, factors, axes=([0], [0]))
    # axes now (r_{n-1}, c_{n-1}, ..., r_0, c_0)
    perm = [2 * k for k in range(n_q)] + [2 * k + 1 for k in range(n_q)]
    return t.transpose(perm).reshape(1 << n_q, 1 << n_q) / total


def explicit_shadow_estimate(state, n_c: int, rng, return_second_moment: bool = False):
    """Reconstructed density matrix from n_c local-Clifford snapshots of a state vector or density matrix.

    With ``return_second_moment`` also returns the per-element sample mean of
    |snapshot|^2, from which the single-snapshot variance follows.
    """
    counts = shadow_label_counts(state, n_c, rng)
    rho = reconstruct_from_counts(counts, n_c)
    if not return_second_moment:
        return rho
    sq = reconstruct_from_counts(counts, n_c, np.abs(SNAPSHOT_FACTORS) ** 2)
    return rho, np.real(sq)


def element_variance(n_q: int, hamming_w, n_c) -> np.ndarray:
    """Task-averaged shadow variance of an element whose indices differ in w bits."""
    w = np.asarray(hamming_w)
    if np.any(w < 0) or np.any(w > n_q):
        raise ValueError("need 0 <= w <= n_q")
    if np.any(np.asarray(n_c) <= 0):
        raise ValueError("n_c must be positive")
    return (1.5 ** w - 4.0 ** (-n_q)) / n_c


def diag_covariance(n_q: int, n_c=1.0) -> np.ndarray:
    idx = np.arange(1 << n_q)
    w = popcount(idx[:, None] ^ idx[None, :])
    return ((-0.5) ** w - 4.0 ** (-n_q)) / n_c


def offdiag_block_covariance(n_q: int, delta: int, n_c=1.0):
    """Covariance among canonical elements (n, n xor delta), n with the top bit of delta clear.

    Returns (row indices n, covariance matrix).
    """
    if not 0 < delta < (1 << n_q):
        raise ValueError("delta must be a non-zero mask")
    top = 1 << (int(delta).bit_length() - 1)
    idx = np.arange(1 << n_q)
    reps = idx[(idx & top) == 0]
    w = popcount(delta)
    passive = ((1 << n_q) - 1) & ~delta
    match = ((reps[:, None] ^ reps[None, :]) & delta) == 0
    r = popcount((reps[:, None] ^ reps[None, :]) & passive)
    k = np.where(match, 1.5 ** w * (-0.5) ** r, 0.0) - 4.0 ** (-n_q) * np.eye(reps.size)
    return reps, k / n_c


def _element_means(f: BooleanFunction, prep: NoiseChannelSpec, rows, cols) -> np.ndarray:
    g = attenuation(prep)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    diff = popcount(rows ^ cols)
    ones = popcount(rows & cols)
    zeros = f.n_q - diff - ones
    s = f.signs.astype(float)
    damp = g.gamma_act ** diff * g.gamma_p1 ** ones * g.gamma_p0 ** zeros
    return s[rows] * s[cols] * damp / float(1 << f.n_q)


def surrogate_mean_matrix(f: BooleanFunction, prep: NoiseChannelSpec) -> np.ndarray:
    """Damped phase-state matrix with exact noisy populations on the diagonal."""
    n = 1 << f.n_q
    idx = np.arange(n)
    mean = _element_means(f, prep, idx[:, None], idx[None, :]).astype(np.complex128)
    mean[idx, idx] = noisy_diagonal(prep, f.n_q)
    return mean


def _diag_noise(n_q: int, n_c: float, gen) -> np.ndarray:
    n = 1 << n_q
    s = popcount(np.arange(n))
    lam = 1.5 ** s * 0.5 ** (n_q - s)
    lam[0] = 0.0  # all-ones mode: the trace is fixed
    v = np.sqrt(lam / n_c) * gen.standard_normal(n)
    kernels.fwht_masked(v, n - 1)
    v /= np.sqrt(n)
    return v - v.mean()  # removes rounding drift only


def _proper_normal(gen, shape):
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)


@dataclass
class SurrogateSectorSample:
    """Reconstructed-matrix view; row[t] = rho[y^alpha, t], col[t] = rho[t, y], diag[t] = rho[t, t]."""

    n_q: int
    n_c: float
    y: int | None = None
    alpha: int | None = None
    row: np.ndarray | None = None
    col: np.ndarray | None = None
    diag: np.ndarray | None = None
    full: np.ndarray | None = None

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                if self.full is not None and name in ("row", "col", "diag"):
                    self._fill_from_full()
                    return
                raise ValueError(f"sample has no {name} sector")

    def _fill_from_full(self):
        if self.y is None or self.alpha is None:
            raise ValueError("y and alpha are needed to read sectors from a full sample")
        self.row = self.full[self.y ^ self.alpha, :].copy()
        self.col = self.full[:, self.y].copy()
        self.diag = np.real(np.diag(self.full)).copy()


def sample_surrogate(f: BooleanFunction, prep: NoiseChannelSpec, alpha=None, y: int | None = 0,
                     n_c=1.0, sectors: str = "sectors", rng=0, mask_chunk: int = 256) -> SurrogateSectorSample:
    """Draw one Gaussian surrogate of the shadow reconstruction at n_c shots.

    ``sectors="sectors"`` returns only the row through y^alpha, the column
    through y and the diagonal; ``"full"`` builds the whole Hermitian matrix.
    ``n_c = inf`` returns the noise-free mean.
    """
    n_q = f.n_q
    a = alpha.alpha if isinstance(alpha, Concept) else alpha
    if n_c <= 0:
        raise ValueError("n_c must be positive")
    gen = as_generator(rng)
    noisy = np.isfinite(n_c)
    n = 1 << n_q
    if sectors == "full":
        if n_q > MAX_FULL_QUBITS:
            raise CapExceededError(f"full surrogate is capped at {MAX_FULL_QUBITS} qubits")
        mat = surrogate_mean_matrix(f, prep)
        if noisy:
            mat[np.arange(n), np.arange(n)] += _diag_noise(n_q, n_c, gen)
            for lo in range(1, n, mask_chunk):
                hi = min(n, lo + mask_chunk)
                g = _proper_normal(gen, (hi - lo, n))
                kernels.add_offdiag_noise(mat, g, lo, n_q, float(n_c))
        return SurrogateSectorSample(n_q, n_c, y, a, full=mat)
    if sectors != "sectors":
        raise ValueError("sectors must be 'sectors' or 'full'")
    if n_q > MAX_SECTOR_QUBITS:
        raise CapExceededError(f"sector surrogate is capped at {MAX_SECTOR_QUBITS} qubits")
    if a is None or y is None:
        raise ValueError("sector sampling needs alpha and y")
    a = int(a)
    y = int(y)
    t = np.arange(n)
    anchor = y ^ a
    row = _element_means(f, prep, np.full(n, anchor), t).astype(np.complex128)
    col = _element_means(f, prep, t, np.full(n, y)).astype(np.complex128)
    diag = noisy_diagonal(prep, n_q).astype(float)
    if noisy:
        diag = diag + _diag_noise(n_q, n_c, gen)
        # mask index delta: row element t = anchor ^ delta, column element t = y ^ delta
        delta = t.copy()
        w = popcount(delta)
        var = (1.5 ** w - 4.0 ** (-n_q)) / n_c
        inside = (delta & ~a) == 0
        disjoint = (delta & a) == 0
        cross = np.zeros(n)
        cross[inside] = 1.5 ** w[inside] * (-0.5) ** (popcount(a) - w[inside]) / n_c
        cross[disjoint] = 1.5 ** w[disjoint] * (-0.5) ** popcount(a) / n_c
        cross[a] = var[a]  # delta = alpha: the row and column entries coincide
        g1 = _proper_normal(gen, n)
        g2 = _proper_normal(gen, n)
        sd = np.sqrt(var)
        coef = np.divide(cross, sd, out=np.zeros(n), where=sd > 0)
        rest = np.sqrt(np.clip(var - coef ** 2, 0.0, None))
        r_noise = sd * g1
        partner = coef * g1 + rest * g2
        c_noise = np.where(disjoint, np.conj(partner), partner)
        row[delta ^ anchor] += r_noise
        col[delta ^ y] += c_noise
        # shared element and the two diagonal positions
        col[anchor] = row[y]
    row[anchor] = diag[anchor]
    col[y] = diag[y]
    return SurrogateSectorSample(n_q, n_c, y, a, row=row, col=col, diag=diag)


def sample_surrogate_dense(f: BooleanFunction, prep: NoiseChannelSpec, n_c, rng, n_samples: int = 1):
    """Reference sampler: dense Cholesky factors of every covariance block (small n_q only)."""
    from scipy.linalg import cholesky

    n_q = f.n_q
    if n_q > 5:
        raise CapExceededError("dense reference sampler is limited to n_q <= 5")
    gen = as_generator(rng)
    n = 1 << n_q
    mean = surrogate_mean_matrix(f, prep)
    kd = diag_covariance(n_q, n_c)
    # the all-ones direction is null, so sample n-1 coordinates and close the trace
    ld = cholesky(kd[:-1, :-1], lower=True)
    blocks = []
    for delta in range(1, n):
        reps, k = offdiag_block_covariance(n_q, delta, n_c)
        blocks.append((delta, reps, cholesky(k, lower=True)))
    out = np.empty((n_samples, n, n), dtype=np.complex128)
    for s in range(n_samples):
        m = mean.copy()
        d = ld @ gen.standard_normal(n - 1)
        m[np.arange(n - 1), np.arange(n - 1)] += d
        m[n - 1, n - 1] -= d.sum()
        for delta, reps, lk in blocks:
            z = lk @ _proper_normal(gen, reps.size)
            m[reps, reps ^ delta] += z
            m[reps ^ delta, reps] += np.conj(z)
        out[s] = m
    return out


def noisy_density_matrix(f: BooleanFunction, prep: NoiseChannelSpec) -> np.ndarray:
    psi = build_phase_state(f)
    rho = np.outer(psi, psi.conj())
    if prep.trivial:
        return rho
    ops = kraus_operators(prep)
    for q in range(f.n_q):
        rho = apply_channel_to_density(rho, ops, q)
    return rho


def trace_distance(a, b) -> float:
    ev = np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))
    return 0.5 * float(np.abs(ev).sum())


def surrogate_vs_truth_report(n_q: int, n_c_grid, channel: NoiseChannelSpec | None = None,
                              repetitions: int = 20, rng=0) -> list:
    """Mean trace distance to the true state for explicit shadows and for the surrogate, per n_c."""
    from .phase_states import random_function
    from .rng import as_source

    if n_q > 6:
        raise CapExceededError("the validation report is limited to n_q <= 6")
    grid = [int(x) for x in n_c_grid]
    if any(x < 1 for x in grid):
        raise ValueError("n_c must be >= 1")
    channel = channel or NoiseChannelSpec("dephasing", 0.0)
    src = as_source(rng)
    rows = []
    for gi, n_c in enumerate(grid):
        td_e = []
        td_s = []
        for r in range(repetitions):
            f = random_function(n_q, src.child(gi, r, 0))
            truth = noisy_density_matrix(f, channel)
            state = build_phase_state(f) if channel.trivial else truth
            est = explicit_shadow_estimate(state, n_c, src.child(gi, r, 1))
            sur = sample_surrogate(f, channel, None, None, n_c, "full", src.child(gi, r, 2)).full
            td_e.append(trace_distance(est, truth))
            td_s.append(trace_distance(sur, truth))
        rows.append({
            "n_q": n_q, "n_c": n_c, "channel": channel.kind, "eps_p": channel.epsilon_p,
            "td_explicit": float(np.mean(td_e)), "td_surrogate": float(np.mean(td_s)),
            "td_explicit_sd": float(np.std(td_e)), "td_surrogate_sd": float(np.std(td_s)),
        })
    return rows
