"""Bitstring helpers and the Walsh-Hadamard transform.

Bit ``i`` of an integer is qubit ``i``; the control qubit of the
measurement circuit is the most significant one, ``n_q - 1``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "BitString", "hamming_weight", "hamming_distance", "popcount",
    "walsh_hadamard_transform", "is_power_of_two",
]


@dataclass(frozen=True)
class BitString:
    bits: int
    n_q: int

    def __post_init__(self):
        if self.n_q < 1:
            raise ValueError("n_q must be >= 1")
        if not 0 <= self.bits < (1 << self.n_q):
            raise ValueError(f"bits {self.bits} out of range for n_q={self.n_q}")

    def __int__(self):
        return self.bits

    def __index__(self):
        return self.bits

    def __xor__(self, other):
        if isinstance(other, BitString):
            if other.n_q != self.n_q:
                raise ValueError("width mismatch")
            other = other.bits
        return BitString(self.bits ^ int(other), self.n_q)

    def bit(self, i: int) -> int:
        return (self.bits >> i) & 1

    def __str__(self):
        # most significant (control) qubit printed first
        return format(self.bits, f"0{self.n_q}b")


def popcount(x):
    """Vectorized popcount for integer arrays (or a Python int)."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count()
    a = np.asarray(x)
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def hamming_weight(x) -> int:
    return popcount(int(x))


def hamming_distance(x, y) -> int:
    if isinstance(x, BitString) and isinstance(y, BitString) and x.n_q != y.n_q:
        raise ValueError(f"width mismatch: {x.n_q} vs {y.n_q}")
    return popcount(int(x) ^ int(y))


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def walsh_hadamard_transform(v, normalize: bool = False, mask=None):
    """Walsh-Hadamard transform of a length-2^m vector (returns a new array).

    With ``normalize`` the output is scaled by 2^{-m/2}, making the map an
    involution. ``mask`` restricts the butterflies to a subset of bit
    positions (a partial transform over those coordinates).
    """
    a = np.array(v, copy=True)
    if a.ndim != 1 or not is_power_of_two(a.shape[0]):
        raise ValueError(f"length must be a power of two, got {a.shape}")
    if not np.iscomplexobj(a):
        a = a.astype(np.float64)
    else:
        a = a.astype(np.complex128)
    n = a.shape[0]
    mask = n - 1 if mask is None else int(mask) & (n - 1)
    kernels.fwht_masked(a, mask)
    if normalize:
        a /= np.sqrt(2.0 ** popcount(mask))
    return a
