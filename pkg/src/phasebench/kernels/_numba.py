"""Compiled kernels. Every function here has a same-signature twin in ``_numpy``."""
import numpy as np
from numba import njit

# op kinds shared with the numpy twin and the circuit compiler
OP_H = 0
OP_X = 1
OP_Y = 2
OP_Z = 3
OP_CNOT = 4
OP_IDLE = 5


@njit(cache=True)
def popcount64(x):
    x = np.uint64(x)
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True)
def _ctz64(x):
    # x != 0
    n = 0
    if (x & np.uint64(0xFFFFFFFF)) == 0:
        n += 32
        x >>= np.uint64(32)
    if (x & np.uint64(0xFFFF)) == 0:
        n += 16
        x >>= np.uint64(16)
    if (x & np.uint64(0xFF)) == 0:
        n += 8
        x >>= np.uint64(8)
    if (x & np.uint64(0xF)) == 0:
        n += 4
        x >>= np.uint64(4)
    if (x & np.uint64(0x3)) == 0:
        n += 2
        x >>= np.uint64(2)
    if (x & np.uint64(0x1)) == 0:
        n += 1
    return n


@njit(cache=True)
def fwht_masked(a, mask):
    """In-place unnormalized Walsh-Hadamard butterflies on the bit positions in ``mask``."""
    n = a.shape[0]
    h = 1
    while h < n:
        if mask & h:
            for start in range(0, n, 2 * h):
                for i in range(start, start + h):
                    x = a[i]
                    y = a[i + h]
                    a[i] = x + y
                    a[i + h] = x - y
        h *= 2
    return a


@njit(cache=True)
def mobius(t):
    """In-place GF(2) Moebius transform (truth table <-> ANF coefficients)."""
    n = t.shape[0]
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            for i in range(start, start + h):
                t[i + h] ^= t[i]
        h *= 2
    return t


@njit(cache=True)
def apply_1q(psi, q, u):
    n = psi.shape[0]
    bit = 1 << q
    u00 = u[0, 0]
    u01 = u[0, 1]
    u10 = u[1, 0]
    u11 = u[1, 1]
    for i in range(n):
        if i & bit:
            continue
        j = i | bit
        a = psi[i]
        b = psi[j]
        psi[i] = u00 * a + u01 * b
        psi[j] = u10 * a + u11 * b
    return psi


@njit(cache=True)
def apply_cnot(psi, c, t):
    n = psi.shape[0]
    cb = 1 << c
    tb = 1 << t
    for i in range(n):
        if (i & cb) and not (i & tb):
            j = i | tb
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp
    return psi


@njit(cache=True)
def apply_swap(psi, a, b):
    n = psi.shape[0]
    ab = 1 << a
    bb = 1 << b
    for i in range(n):
        if (i & ab) and not (i & bb):
            j = (i ^ ab) | bb
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp
    return psi


@njit(cache=True)
def qubit_block(psi, q):
    """Reduced 2x2 density block of qubit ``q``: (rho00, rho11, rho01)."""
    n = psi.shape[0]
    bit = 1 << q
    p0 = 0.0
    p1 = 0.0
    coh = 0j
    for i in range(n):
        if i & bit:
            continue
        a = psi[i]
        b = psi[i | bit]
        p0 += a.real * a.real + a.imag * a.imag
        p1 += b.real * b.real + b.imag * b.imag
        coh += a * np.conj(b)
    return p0, p1, coh


@njit(cache=True)
def _pauli(psi, q, k):
    n = psi.shape[0]
    bit = 1 << q
    if k == 0:
        return
    for i in range(n):
        if i & bit:
            continue
        j = i | bit
        a = psi[i]
        b = psi[j]
        if k == 1:
            psi[i] = b
            psi[j] = a
        elif k == 2:
            psi[i] = -1j * b
            psi[j] = 1j * a
        else:
            psi[j] = -b


@njit(cache=True)
def _hadamard(psi, q):
    n = psi.shape[0]
    bit = 1 << q
    s = 1.0 / np.sqrt(2.0)
    for i in range(n):
        if i & bit:
            continue
        j = i | bit
        a = psi[i]
        b = psi[j]
        psi[i] = s * (a + b)
        psi[j] = s * (a - b)


@njit(cache=True)
def _amp_damp(psi, q, p, u):
    n = psi.shape[0]
    bit = 1 << q
    p1 = 0.0
    for i in range(n):
        if i & bit:
            a = psi[i]
            p1 += a.real * a.real + a.imag * a.imag
    pj = p * p1
    if u < pj:
        scale = 1.0 / np.sqrt(pj / p) if p > 0 else 0.0
        for i in range(n):
            if i & bit:
                continue
            psi[i] = psi[i | bit] * scale
            psi[i | bit] = 0.0
    else:
        keep = np.sqrt(1.0 - p)
        norm = 1.0 / np.sqrt(1.0 - pj)
        for i in range(n):
            if i & bit:
                psi[i] *= keep * norm
            else:
                psi[i] *= norm


@njit(cache=True)
def run_noisy_ops(psi, kinds, q0, q1, p_dep, p_amp, p_z, uni):
    """Apply a compiled op list to ``psi`` in place, drawing noise from ``uni[op, 0:2]``."""
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        a = q0[k]
        if kind == OP_H:
            _hadamard(psi, a)
        elif kind == OP_X:
            _pauli(psi, a, 1)
        elif kind == OP_Y:
            _pauli(psi, a, 2)
        elif kind == OP_Z:
            _pauli(psi, a, 3)
        elif kind == OP_CNOT:
            apply_cnot(psi, a, q1[k])
        if kind == OP_IDLE:
            if p_amp[k] > 0.0:
                _amp_damp(psi, a, p_amp[k], uni[k, 0])
            if p_z[k] > 0.0 and uni[k, 1] < p_z[k]:
                _pauli(psi, a, 3)
        elif p_dep[k] > 0.0 and uni[k, 0] < p_dep[k]:
            if kind == OP_CNOT:
                idx = 1 + int(uni[k, 1] * 15.0)
                if idx > 15:
                    idx = 15
                _pauli(psi, a, idx % 4)
                _pauli(psi, q1[k], idx // 4)
            else:
                idx = 1 + int(uni[k, 1] * 3.0)
                if idx > 3:
                    idx = 3
                _pauli(psi, a, idx)
    return psi


@njit(cache=True)
def gf2_forced_pivot(rows, rhs, n_cols):
    """Row-priority forward elimination over bit-packed GF(2) rows.

    Returns (status, solution_words, has_pivot); status is 0 for a row
    that introduced a pivot, 1 for a consistent redundant row and 2 for a
    row discarded as inconsistent.
    """
    n_rows, n_words = rows.shape
    status = np.zeros(n_rows, dtype=np.int8)
    basis = np.zeros((n_cols, n_words), dtype=np.uint64)
    basis_rhs = np.zeros(n_cols, dtype=np.uint8)
    has_pivot = np.zeros(n_cols, dtype=np.bool_)
    support = np.zeros(n_words, dtype=np.uint64)
    for r in range(n_rows):
        for w in range(n_words):
            support[w] |= rows[r, w]
    target = 0
    for w in range(n_words):
        target += popcount64(support[w])
    sol = np.zeros(n_words, dtype=np.uint64)
    work = np.zeros(n_words, dtype=np.uint64)
    rank = 0
    solved = False
    for r in range(n_rows):
        if solved:
            par = 0
            for w in range(n_words):
                par ^= popcount64(rows[r, w] & sol[w]) & 1
            status[r] = 1 if par == rhs[r] else 2
            continue
        for w in range(n_words):
            work[w] = rows[r, w]
        b = rhs[r]
        w0 = 0
        while True:
            while w0 < n_words and work[w0] == 0:
                w0 += 1
            if w0 == n_words:
                status[r] = 1 if b == 0 else 2
                break
            c = w0 * 64 + _ctz64(work[w0])
            if has_pivot[c]:
                for w in range(w0, n_words):
                    work[w] ^= basis[c, w]
                b ^= basis_rhs[c]
            else:
                for w in range(n_words):
                    basis[c, w] = work[w]
                basis_rhs[c] = b
                has_pivot[c] = True
                status[r] = 0
                rank += 1
                break
        if rank == target:
            _back_substitute(basis, basis_rhs, has_pivot, sol)
            solved = True
    if not solved:
        _back_substitute(basis, basis_rhs, has_pivot, sol)
    return status, sol, has_pivot


@njit(cache=True)
def _back_substitute(basis, basis_rhs, has_pivot, sol):
    n_cols, n_words = basis.shape
    for w in range(n_words):
        sol[w] = 0
    for c in range(n_cols - 1, -1, -1):
        if not has_pivot[c]:
            continue
        par = basis_rhs[c]
        for w in range(c >> 6, n_words):
            par ^= popcount64(basis[c, w] & sol[w]) & 1
        if par:
            sol[c >> 6] |= np.uint64(1) << np.uint64(c & 63)


@njit(cache=True)
def hypergraph_rows(ls, ss, col_pos, n_words):
    """Differential-monomial rows: bit set for every e with e_l = 1 and e ⊆ s ∪ {l}."""
    n_rows = ls.shape[0]
    rows = np.zeros((n_rows, n_words), dtype=np.uint64)
    for r in range(n_rows):
        lb = 1 << ls[r]
        sub = ss[r] & ~lb
        t = sub
        while True:
            p = col_pos[t | lb]
            rows[r, p >> 6] |= np.uint64(1) << np.uint64(p & 63)
            if t == 0:
                break
            t = (t - 1) & sub
    return rows


@njit(cache=True)
def add_offdiag_noise(mat, g, delta_lo, n_q, n_c):
    """Add surrogate fluctuations for masks delta_lo .. delta_lo + len(g) - 1.

    ``g`` holds standard proper complex normals, one row of length 2^n_q per
    mask. Within a mask block the covariance is diagonal in the Hadamard
    basis of the passive qubits, so one masked butterfly pass suffices.
    """
    dim = 1 << n_q
    full = dim - 1
    shift = 4.0 ** (-n_q)
    v = np.empty(dim, dtype=np.complex128)
    for j in range(g.shape[0]):
        delta = delta_lo + j
        w = popcount64(delta)
        m = n_q - w
        passive = full & ~delta
        base = 1.5 ** w
        for idx in range(dim):
            sp = popcount64(idx & passive)
            lam = base * (1.5 ** sp) * (0.5 ** (m - sp)) - shift
            v[idx] = np.sqrt(lam / n_c) * g[j, idx]
        fwht_masked(v, passive)
        scale = 1.0 / np.sqrt(2.0 ** m)
        top = 1
        while (top << 1) <= delta:
            top <<= 1
        for nn in range(dim):
            if nn & top:
                continue
            z = v[nn] * scale
            mm = nn ^ delta
            mat[nn, mm] += z
            mat[mm, nn] += np.conj(z)
    return mat
