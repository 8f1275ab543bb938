"""Time the compiled kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--n-q 12] [--repeat 5]

Numba timings exclude the first (compiling) call. The end-to-end section
re-runs two pipeline steps in subprocesses with PHASEBENCH_NUMBA=0/1.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from phasebench.kernels import _numba as nb
from phasebench.kernels import _numpy as npk


def best_of(fn, make_args, repeat):
    times = []
    for _ in range(repeat):
        args = make_args()
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_q, gen):
    dim = 1 << n_q
    vec = gen.standard_normal(dim)
    table = gen.integers(0, 2, dim).astype(np.uint8)
    psi = (gen.standard_normal(dim) + 1j * gen.standard_normal(dim)) / np.sqrt(2 * dim)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

    n_rows, n_cols = 4 * n_q * 64, min(dim, 2048)
    n_words = (n_cols + 63) // 64
    rows = gen.integers(0, 2**63, size=(n_rows, n_words), dtype=np.uint64)
    if n_cols % 64:
        rows[:, -1] &= np.uint64((1 << (n_cols % 64)) - 1)
    rhs = gen.integers(0, 2, n_rows).astype(np.uint8)

    ls = gen.integers(0, n_q, 4 * dim).astype(np.int64)
    ss = gen.integers(0, dim, 4 * dim).astype(np.int64)
    col_pos = np.arange(dim, dtype=np.int64)

    m = min(n_q, 9)
    mat = np.zeros((1 << m, 1 << m), dtype=complex)
    g = gen.standard_normal((1 << (m - 1), 1 << m)) + 1j * gen.standard_normal((1 << (m - 1), 1 << m))

    return {
        "fwht_masked": (lambda: (vec.copy(), dim - 1)),
        "mobius": (lambda: (table.copy(),)),
        "apply_1q (all qubits)": None,
        "gf2_forced_pivot": (lambda: (rows, rhs, n_cols)),
        "hypergraph_rows": (lambda: (ls, ss, col_pos, (dim + 63) // 64)),
        "add_offdiag_noise": (lambda: (mat.copy(), g, 1, m, 100.0)),
        "_psi": psi, "_h": h,
    }


def kernel_table(n_q, repeat):
    gen = np.random.default_rng(0)
    c = cases(n_q, gen)
    psi, h = c.pop("_psi"), c.pop("_h")

    def all_1q(mod):
        def run(p):
            for q in range(n_q):
                mod.apply_1q(p, q, h)
        return run

    print(f"{'kernel':24s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for name, make in c.items():
        if make is None:
            fns = (all_1q(nb), all_1q(npk))
            make = lambda: (psi.copy(),)  # noqa: E731
        else:
            fns = (getattr(nb, name), getattr(npk, name))
        fns[0](*make())  # compile
        t_nb = best_of(fns[0], make, repeat)
        t_np = best_of(fns[1], make, repeat)
        print(f"{name:24s} {1e3 * t_nb:12.3f} {1e3 * t_np:12.3f} {t_np / t_nb:9.1f}")


E2E = """
import time
import numpy as np
from phasebench import NoiseChannelSpec, random_function, backend_name
from phasebench.mf.hypergraph import run_hypergraph
from phasebench.shadows import sample_surrogate
f = random_function({n}, 1)
prep = NoiseChannelSpec("relaxation", 0.1)
run_hypergraph(f, prep, 16, 0)
sample_surrogate(random_function(6, 1), prep, 1, None, 100.0, "full", 0)
t = time.perf_counter(); run_hypergraph(f, prep, 4096, 2); a = time.perf_counter() - t
g = random_function({m}, 2)
t = time.perf_counter(); sample_surrogate(g, prep, 1, None, 1e4, "full", 3); b = time.perf_counter() - t
print(backend_name(), a, b)
"""


def end_to_end(n_q):
    m = min(n_q, 10)
    print(f"\nend to end: hypergraph run at n_q={n_q} (kappa=4096), full surrogate sample at n_q={m}")
    for flag in ("1", "0"):
        env = dict(os.environ, PHASEBENCH_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(n=n_q, m=m)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:6s} hypergraph {float(out[1]):8.3f} s   surrogate {float(out[2]):8.3f} s")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-q", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    kernel_table(args.n_q, args.repeat)
    if not args.skip_e2e:
        end_to_end(args.n_q)


if __name__ == "__main__":
    main()
