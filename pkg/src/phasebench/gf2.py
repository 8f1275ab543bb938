"""Bit-packed GF(2) matrices and row-priority (forced pivot) elimination."""
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = ["Gf2Matrix", "Gf2Solution", "gf2_eliminate", "pack_bits", "unpack_bits"]

WORD = 64


def n_words_for(n_cols: int) -> int:
    return max(1, (n_cols + WORD - 1) // WORD)


def pack_bits(dense) -> np.ndarray:
    """(n_rows, n_cols) 0/1 array -> (n_rows, n_words) uint64, column j at bit j."""
    dense = np.atleast_2d(np.asarray(dense, dtype=np.uint8) & 1)
    n_rows, n_cols = dense.shape
    n_words = n_words_for(n_cols)
    padded = np.zeros((n_rows, n_words * WORD), dtype=np.uint8)
    padded[:, :n_cols] = dense
    packed = np.packbits(padded.reshape(n_rows, n_words, WORD), axis=2, bitorder="little")
    return packed.view("<u8").reshape(n_rows, n_words).astype(np.uint64)


def unpack_bits(words, n_cols: int) -> np.ndarray:
    words = np.atleast_2d(np.asarray(words, dtype=np.uint64))
    as_bytes = words.astype("<u8").view(np.uint8).reshape(words.shape[0], -1)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :n_cols]


@dataclass
class Gf2Matrix:
    rows: np.ndarray  # (n_rows, n_words) uint64
    n_cols: int

    def __post_init__(self):
        self.rows = np.ascontiguousarray(np.atleast_2d(self.rows), dtype=np.uint64)
        if self.rows.shape[1] != n_words_for(self.n_cols):
            raise ValueError("word count does not match n_cols")
        tail = self.n_cols % WORD
        if tail and np.any(self.rows[:, -1] >> np.uint64(tail)):
            raise ValueError("bits set beyond n_cols")

    @classmethod
    def from_dense(cls, dense) -> "Gf2Matrix":
        dense = np.atleast_2d(dense)
        return cls(pack_bits(dense), dense.shape[1])

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.rows, self.n_cols)

    def take(self, order) -> "Gf2Matrix":
        return Gf2Matrix(self.rows[np.asarray(order)], self.n_cols)


@dataclass
class Gf2Solution:
    """Outcome of forced-pivot elimination.

    ``solution`` assigns every column; columns without a pivot are left at 0
    and listed in ``unresolved``. Row indices refer to the caller's rows.
    """

    solution: np.ndarray
    pivot_columns: np.ndarray
    unresolved: np.ndarray
    pivot_rows: np.ndarray
    redundant_rows: np.ndarray
    inconsistent_rows: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.pivot_columns.size)

    @property
    def consistent(self) -> bool:
        return self.inconsistent_rows.size == 0


def gf2_eliminate(system: Gf2Matrix, rhs, row_priority=None) -> Gf2Solution:
    """Forward elimination processing rows in priority order.

    A row is reduced against the pivots accepted so far. If anything is
    left it claims its lowest remaining column as a new pivot; otherwise it
    is redundant, or inconsistent when its reduced right-hand side is 1.
    Earlier rows are never overridden by later ones.
    """
    if system.n_rows == 0 or system.n_cols == 0:
        raise ValueError("empty system")
    rhs = np.asarray(rhs, dtype=np.uint8) & 1
    if rhs.shape != (system.n_rows,):
        raise ValueError("rhs length must equal the number of rows")
    order = np.arange(system.n_rows) if row_priority is None else np.asarray(row_priority, dtype=np.int64)
    if order.shape != (system.n_rows,) or np.unique(order).size != order.size:
        raise ValueError("row_priority must be a permutation of the rows")
    rows = np.ascontiguousarray(system.rows[order])
    status, sol_words, has_pivot = kernels.gf2_forced_pivot(rows, np.ascontiguousarray(rhs[order]), system.n_cols)
    status = np.asarray(status)
    solution = unpack_bits(np.asarray(sol_words)[None, :], system.n_cols)[0]
    has_pivot = np.asarray(has_pivot, dtype=bool)
    return Gf2Solution(
        solution=solution.astype(np.uint8),
        pivot_columns=np.flatnonzero(has_pivot),
        unresolved=np.flatnonzero(~has_pivot),
        pivot_rows=order[status == 0],
        redundant_rows=order[status == 1],
        inconsistent_rows=order[status == 2],
    )
