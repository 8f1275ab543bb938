import json

import numpy as np
import pytest

from phasebench import NoiseChannelSpec, random_function
from phasebench.kernels import _numba as nb
from phasebench.kernels import _numpy as npk


def _state(gen, n):
    v = gen.standard_normal(1 << n) + 1j * gen.standard_normal(1 << n)
    return v / np.linalg.norm(v)


def test_fwht_and_mobius(gen):
    for mask in (0b1111111, 0b1010011, 0):
        a = gen.standard_normal(128)
        x, y = a.copy(), a.copy()
        nb.fwht_masked(x, mask)
        npk.fwht_masked(y, mask)
        assert np.allclose(x, y)
    t = gen.integers(0, 2, 256).astype(np.uint8)
    assert np.array_equal(nb.mobius(t.copy()), npk.mobius(t.copy()))


def test_gates(gen):
    u = np.linalg.qr(gen.standard_normal((2, 2)) + 1j * gen.standard_normal((2, 2)))[0]
    psi = _state(gen, 5)
    for fn, args in ((lambda m, p: m.apply_1q(p, 3, u), ()), (lambda m, p: m.apply_cnot(p, 4, 1), ()),
                     (lambda m, p: m.apply_swap(p, 0, 2), ())):
        a, b = psi.copy(), psi.copy()
        fn(nb, a)
        fn(npk, b)
        assert np.allclose(a, b)
    assert np.allclose(nb.qubit_block(psi, 2), npk.qubit_block(psi, 2))


def test_noisy_ops(gen):
    m = 60
    kinds = gen.choice([nb.OP_H, nb.OP_X, nb.OP_Z, nb.OP_CNOT, nb.OP_IDLE], m).astype(np.int64)
    q0 = gen.integers(0, 4, m)
    q1 = (q0 + 1 + gen.integers(0, 3, m)) % 4
    p_dep = gen.uniform(0, 0.5, m)
    p_amp = np.where(kinds == nb.OP_IDLE, gen.uniform(0, 0.5, m), 0.0)
    p_z = np.where(kinds == nb.OP_IDLE, gen.uniform(0, 0.5, m), 0.0)
    uni = gen.uniform(size=(m, 2))
    psi = _state(gen, 4)
    a = nb.run_noisy_ops(psi.copy(), kinds, q0, q1, p_dep, p_amp, p_z, uni)
    b = npk.run_noisy_ops(psi.copy(), kinds, q0, q1, p_dep, p_amp, p_z, uni)
    assert np.allclose(a, b)


def test_gf2(gen):
    for _ in range(10):
        rows = gen.integers(0, 2**63, size=(40, 2), dtype=np.uint64) & np.uint64((1 << 40) - 1)
        rows[:, 1] = 0
        rhs = gen.integers(0, 2, 40).astype(np.uint8)
        ra = nb.gf2_forced_pivot(rows.copy(), rhs.copy(), 128)
        rb = npk.gf2_forced_pivot(rows.copy(), rhs.copy(), 128)
        for x, y in zip(ra, rb):
            assert np.array_equal(x, y)


def test_hypergraph_rows(gen):
    n = 6
    from phasebench.mf.hypergraph import monomial_order
    cols = monomial_order(n)
    pos = np.empty(1 << n, dtype=np.int64)
    pos[cols] = np.arange(cols.size)
    ls = gen.integers(0, n, 30)
    ss = gen.integers(0, 1 << n, 30)
    assert np.array_equal(nb.hypergraph_rows(ls, ss, pos, 1), npk.hypergraph_rows(ls, ss, pos, 1))


def test_offdiag_noise(gen):
    n = 5
    g = gen.standard_normal(((1 << n) - 1, 1 << n))
    a = np.zeros((32, 32), dtype=np.complex128)
    b = a.copy()
    nb.add_offdiag_noise(a, g.astype(np.complex128), 1, n, 100.0)
    npk.add_offdiag_noise(b, g.astype(np.complex128), 1, n, 100.0)
    assert np.allclose(a, b)


PIPE = """
import json, numpy as np
from phasebench import NoiseChannelSpec, random_function, backend_name
from phasebench.mf.hypergraph import run_hypergraph
from phasebench.shadows import sample_surrogate
f = random_function(6, 5)
res, ok, _ = run_hypergraph(f, NoiseChannelSpec("relaxation", 0.1), 80, 3)
smp = sample_surrogate(f, NoiseChannelSpec("dephasing", 0.1), None, None, 500.0, "full", 4)
print(json.dumps({"backend": backend_name(), "mono": res.monomials.tolist(), "ok": bool(ok),
                  "tr": float(np.trace(smp.full).real), "s": float(np.abs(smp.full).sum())}))
"""


def test_pipelines_match_numpy_backend(numpy_backend):
    doc = json.loads(numpy_backend(PIPE))
    assert doc["backend"] == "numpy"
    from phasebench.mf.hypergraph import run_hypergraph
    from phasebench.shadows import sample_surrogate
    f = random_function(6, 5)
    res, ok, _ = run_hypergraph(f, NoiseChannelSpec("relaxation", 0.1), 80, 3)
    smp = sample_surrogate(f, NoiseChannelSpec("dephasing", 0.1), None, None, 500.0, "full", 4)
    assert res.monomials.tolist() == doc["mono"] and bool(ok) == doc["ok"]
    assert np.trace(smp.full).real == pytest.approx(doc["tr"])
    assert np.abs(smp.full).sum() == pytest.approx(doc["s"])
