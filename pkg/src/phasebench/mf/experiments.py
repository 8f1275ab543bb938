"""Accuracy-versus-k curves for the measure-first decoders."""
import numpy as np

from ..noise import NoiseChannelSpec
from ..phase_states import Concept, random_function
from ..rng import as_source
from ..shadows import sample_surrogate
from .hypergraph import run_hypergraph, task_accuracy
from .ml import TrainConfig, make_dataset, train
from .spectral import principal_eigenvector, single_element_decode, sum_decode

__all__ = ["MF_METHODS", "method_accuracy", "accuracy_replicates"]

MF_METHODS = ("eigenshadow", "hypergraph", "ml", "single", "local", "global")


def _eigenshadow(n_q, alpha, prep, n_c, src, f_src, opts):
    f = random_function(n_q, f_src)
    smp = sample_surrogate(f, prep, alpha, None, n_c, "full", src.child(1))
    _, v, ok = principal_eigenvector(smp.full, opts.get("eig_method", "eigh"), src.child(2))
    y = np.arange(1 << (n_q - 1))
    truth = f.table[y] ^ f.table[y ^ alpha]
    if not ok:
        return 0.5
    score = np.real(v[y] * np.conj(v[y ^ alpha]))
    coin = src.child(3).generator().integers(0, 2, size=y.size)
    guess = np.where(score < 0, 1, np.where(score > 0, 0, coin))
    return float(np.mean(guess == truth))


def _hypergraph(n_q, alpha, prep, n_c, src, f_src, opts):
    f = random_function(n_q, f_src)
    kappa = max(1, int(round(n_c / n_q)))
    res, _, _ = run_hypergraph(f, prep, kappa, src.child(1))
    return task_accuracy(res.function, f, alpha)


def _ml(n_q, alpha, prep, n_c, src, f_src, opts):
    x, lab, _ = make_dataset(n_q, alpha, prep, n_c, opts.get("ml_samples", 2000),
                             opts.get("ml_variant", "paired"), src.child(0))
    return train(x, lab, opts.get("ml_config", TrainConfig()), src.child(1)).val_accuracy


def _elementwise(kind):
    def run(n_q, alpha, prep, n_c, src, f_src, opts):
        hits = 0
        m = opts.get("inner_functions", 50)
        for i in range(m):
            s = src.child(i)
            f = random_function(n_q, s.child(0))
            y = int(s.child(1).generator().integers(0, 1 << (n_q - 1)))
            smp = sample_surrogate(f, prep, alpha, y, n_c, "sectors", s.child(2))
            if kind == "single":
                bit = single_element_decode(smp, y, alpha, s.child(3)).bit
            else:
                bit = sum_decode(smp, y, alpha, kind, s.child(3)).bit
            hits += bit == (f.table[y] ^ f.table[y ^ alpha])
        return hits / m
    return run


_RUNNERS = {
    "eigenshadow": _eigenshadow, "hypergraph": _hypergraph, "ml": _ml,
    "single": _elementwise("single"), "local": _elementwise("local"), "global": _elementwise("global"),
}


def method_accuracy(method: str, n_q: int, alpha, prep: NoiseChannelSpec, n_c: float, rng,
                    f_rng=None, **opts) -> float:
    """One accuracy estimate of ``method`` at ``n_c`` copies.

    ``f_rng`` fixes the function draw for single-instance methods; by
    default it is derived from ``rng``.
    """
    if method not in _RUNNERS:
        raise ValueError(f"unknown MF method {method!r}")
    a = alpha.alpha if isinstance(alpha, Concept) else int(alpha)
    Concept(a, n_q)
    src = as_source(rng)
    f_src = as_source(f_rng) if f_rng is not None else src.child(999)
    return _RUNNERS[method](n_q, a, prep, float(n_c), src, f_src, opts)


def accuracy_replicates(method: str, n_q: int, alpha, prep: NoiseChannelSpec, k_grid, replicates: int,
                        rng, **opts) -> np.ndarray:
    """(replicates, len(k_grid)) accuracies at n_c = 2^(k n_q).

    Eigenshadow and hypergraph replicates keep one random f along the k grid,
    so each row is a curve of one instance.
    """
    src = as_source(rng)
    k_grid = np.asarray(k_grid, dtype=float)
    out = np.empty((int(replicates), k_grid.size))
    shared_f = method in ("eigenshadow", "hypergraph")
    for r in range(int(replicates)):
        f_rng = src.child(r, 999) if shared_f else None
        for j, k in enumerate(k_grid):
            out[r, j] = method_accuracy(method, n_q, alpha, prep, 2.0 ** (k * n_q), src.child(r, j),
                                        f_rng, **opts)
    return out
