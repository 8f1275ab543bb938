"""Hot loops, compiled with numba unless ``PHASEBENCH_NUMBA=0``."""
from .._accel import NUMBA_ENABLED

if NUMBA_ENABLED:
    from . import _numba as impl
else:
    from . import _numpy as impl

OP_H = impl.OP_H
OP_X = impl.OP_X
OP_Y = impl.OP_Y
OP_Z = impl.OP_Z
OP_CNOT = impl.OP_CNOT
OP_IDLE = impl.OP_IDLE

fwht_masked = impl.fwht_masked
mobius = impl.mobius
apply_1q = impl.apply_1q
apply_cnot = impl.apply_cnot
apply_swap = impl.apply_swap
qubit_block = impl.qubit_block
run_noisy_ops = impl.run_noisy_ops
gf2_forced_pivot = impl.gf2_forced_pivot
hypergraph_rows = impl.hypergraph_rows
add_offdiag_noise = impl.add_offdiag_noise

__all__ = [
    "impl", "OP_H", "OP_X", "OP_Y", "OP_Z", "OP_CNOT", "OP_IDLE",
    "fwht_masked", "mobius", "apply_1q", "apply_cnot", "apply_swap",
    "qubit_block", "run_noisy_ops", "gf2_forced_pivot", "hypergraph_rows",
    "add_offdiag_noise",
]
