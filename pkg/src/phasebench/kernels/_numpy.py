"""Pure-numpy twins of the compiled kernels (same signatures, same results)."""
import numpy as np

OP_H = 0
OP_X = 1
OP_Y = 2
OP_Z = 3
OP_CNOT = 4
OP_IDLE = 5

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def popcount64(x):
    x = np.asarray(x, dtype=np.uint64)
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    out = (x * _H01) >> np.uint64(56)
    return out.astype(np.int64) if out.ndim else int(out)


def _bit_view(a, q):
    # view a length-2^n vector as (high, 2, low) around bit q
    n = a.shape[0]
    low = 1 << q
    return a.reshape(n // (2 * low), 2, low)


def fwht_masked(a, mask):
    n = a.shape[0]
    h = 1
    q = 0
    while h < n:
        if mask & h:
            v = _bit_view(a, q)
            x = v[:, 0, :].copy()
            y = v[:, 1, :]
            v[:, 0, :] += y
            v[:, 1, :] = x - y
        h *= 2
        q += 1
    return a


def mobius(t):
    n = t.shape[0]
    h = 1
    q = 0
    while h < n:
        v = _bit_view(t, q)
        v[:, 1, :] ^= v[:, 0, :]
        h *= 2
        q += 1
    return t


def apply_1q(psi, q, u):
    v = _bit_view(psi, q)
    a = v[:, 0, :].copy()
    b = v[:, 1, :].copy()
    v[:, 0, :] = u[0, 0] * a + u[0, 1] * b
    v[:, 1, :] = u[1, 0] * a + u[1, 1] * b
    return psi


def _pair_indices(n, c, t):
    idx = np.arange(n)
    sel = ((idx >> c) & 1).astype(bool) & ~((idx >> t) & 1).astype(bool)
    return idx[sel]


def apply_cnot(psi, c, t):
    i = _pair_indices(psi.shape[0], c, t)
    j = i | (1 << t)
    psi[i], psi[j] = psi[j].copy(), psi[i].copy()
    return psi


def apply_swap(psi, a, b):
    i = _pair_indices(psi.shape[0], a, b)
    j = (i ^ (1 << a)) | (1 << b)
    psi[i], psi[j] = psi[j].copy(), psi[i].copy()
    return psi


def qubit_block(psi, q):
    v = _bit_view(psi, q)
    a = v[:, 0, :]
    b = v[:, 1, :]
    return (float(np.sum(np.abs(a) ** 2)), float(np.sum(np.abs(b) ** 2)),
            complex(np.sum(a * np.conj(b))))


_PAULI = (
    np.eye(2, dtype=np.complex128),
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
_HAD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)


def _amp_damp(psi, q, p, u):
    v = _bit_view(psi, q)
    p1 = float(np.sum(np.abs(v[:, 1, :]) ** 2))
    pj = p * p1
    if u < pj:
        v[:, 0, :] = v[:, 1, :] / np.sqrt(p1)
        v[:, 1, :] = 0.0
    else:
        norm = 1.0 / np.sqrt(1.0 - pj)
        v[:, 1, :] *= np.sqrt(1.0 - p)
        psi *= norm


def run_noisy_ops(psi, kinds, q0, q1, p_dep, p_amp, p_z, uni):
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        a = int(q0[k])
        if kind == OP_H:
            apply_1q(psi, a, _HAD)
        elif kind in (OP_X, OP_Y, OP_Z):
            apply_1q(psi, a, _PAULI[kind])
        elif kind == OP_CNOT:
            apply_cnot(psi, a, int(q1[k]))
        if kind == OP_IDLE:
            if p_amp[k] > 0.0:
                _amp_damp(psi, a, p_amp[k], uni[k, 0])
            if p_z[k] > 0.0 and uni[k, 1] < p_z[k]:
                apply_1q(psi, a, _PAULI[3])
        elif p_dep[k] > 0.0 and uni[k, 0] < p_dep[k]:
            if kind == OP_CNOT:
                idx = min(1 + int(uni[k, 1] * 15.0), 15)
                if idx % 4:
                    apply_1q(psi, a, _PAULI[idx % 4])
                if idx // 4:
                    apply_1q(psi, int(q1[k]), _PAULI[idx // 4])
            else:
                idx = min(1 + int(uni[k, 1] * 3.0), 3)
                apply_1q(psi, a, _PAULI[idx])
    return psi


def _row_parity(row, sol):
    return int(np.bitwise_xor.reduce(popcount64(row & sol) & 1)) if row.size else 0


def gf2_forced_pivot(rows, rhs, n_cols):
    n_rows, n_words = rows.shape
    status = np.zeros(n_rows, dtype=np.int8)
    basis = np.zeros((n_cols, n_words), dtype=np.uint64)
    basis_rhs = np.zeros(n_cols, dtype=np.uint8)
    has_pivot = np.zeros(n_cols, dtype=bool)
    support = np.bitwise_or.reduce(rows, axis=0) if n_rows else np.zeros(n_words, np.uint64)
    target = int(np.sum(popcount64(support)))
    sol = np.zeros(n_words, dtype=np.uint64)
    rank = 0
    solved = False
    for r in range(n_rows):
        if solved:
            status[r] = 1 if _row_parity(rows[r], sol) == rhs[r] else 2
            continue
        work = rows[r].copy()
        b = int(rhs[r])
        while True:
            nz = np.flatnonzero(work)
            if nz.size == 0:
                status[r] = 1 if b == 0 else 2
                break
            w0 = int(nz[0])
            word = int(work[w0])
            c = w0 * 64 + ((word & -word).bit_length() - 1)
            if has_pivot[c]:
                work ^= basis[c]
                b ^= int(basis_rhs[c])
            else:
                basis[c] = work
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


def _back_substitute(basis, basis_rhs, has_pivot, sol):
    sol[:] = 0
    for c in np.flatnonzero(has_pivot)[::-1]:
        par = int(basis_rhs[c]) ^ _row_parity(basis[c], sol)
        if par:
            sol[c >> 6] |= np.uint64(1) << np.uint64(c & 63)


def hypergraph_rows(ls, ss, col_pos, n_words):
    n_rows = ls.shape[0]
    dim = col_pos.shape[0]
    rows = np.zeros((n_rows, n_words), dtype=np.uint64)
    e = np.arange(dim, dtype=np.int64)
    for r in range(n_rows):
        lb = 1 << int(ls[r])
        allowed = int(ss[r]) | lb
        hit = ((e & lb) != 0) & ((e & ~allowed) == 0)
        pos = col_pos[e[hit]]
        np.bitwise_or.at(rows[r], pos >> 6, np.left_shift(np.uint64(1), (pos & 63).astype(np.uint64)))
    return rows


def add_offdiag_noise(mat, g, delta_lo, n_q, n_c):
    dim = 1 << n_q
    full = dim - 1
    idx = np.arange(dim, dtype=np.int64)
    shift = 4.0 ** (-n_q)
    for j in range(g.shape[0]):
        delta = delta_lo + j
        w = bin(delta).count("1")
        m = n_q - w
        passive = full & ~delta
        sp = popcount64((idx & passive).astype(np.uint64))
        lam = 1.5 ** w * 1.5 ** sp * 0.5 ** (m - sp) - shift
        v = np.sqrt(lam / n_c) * g[j]
        fwht_masked(v, passive)
        v *= 1.0 / np.sqrt(2.0 ** m)
        top = 1 << (delta.bit_length() - 1)
        nn = idx[(idx & top) == 0]
        mm = nn ^ delta
        mat[nn, mm] += v[nn]
        mat[mm, nn] += np.conj(v[nn])
    return mat
