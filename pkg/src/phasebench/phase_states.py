"""Boolean functions, phase states and the parity label."""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .bits import BitString, popcount
from .errors import CapExceededError
from .rng import as_generator

__all__ = [
    "BooleanFunction", "Concept", "random_function", "build_phase_state",
    "target_bit", "anf_from_dense", "dense_from_anf", "concept_for_rule",
    "basis_state", "sample_input_state", "MAX_DENSE_QUBITS",
]

MAX_DENSE_QUBITS = 24


def anf_from_dense(table) -> np.ndarray:
    """Truth table (0/1, length 2^n) -> sorted array of monomial indices e with w_e = 1."""
    t = np.array(table, dtype=np.uint8) & 1
    kernels.mobius(t)
    return np.flatnonzero(t).astype(np.int64)


def dense_from_anf(monomials, n_q: int) -> np.ndarray:
    t = np.zeros(1 << n_q, dtype=np.uint8)
    mono = np.asarray(monomials, dtype=np.int64)
    if mono.size and (mono.min() < 0 or mono.max() >= (1 << n_q)):
        raise ValueError("monomial index out of range")
    # duplicated monomials cancel over GF(2)
    np.bitwise_xor.at(t, mono, 1)
    kernels.mobius(t)
    return t


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """Dense truth table of f: {0,1}^n -> {0,1}; entry k is f(k)."""

    table: np.ndarray
    n_q: int
    _anf: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.uint8)
        if t.shape != (1 << self.n_q,):
            raise ValueError(f"table must have length 2^{self.n_q}")
        if np.any(t > 1):
            raise ValueError("table entries must be 0 or 1")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_anf(cls, monomials, n_q: int) -> "BooleanFunction":
        return cls(dense_from_anf(monomials, n_q), n_q)

    @classmethod
    def from_hex(cls, text: str, n_q: int) -> "BooleanFunction":
        raw = bytes.fromhex(text)
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
        return cls(bits[: 1 << n_q], n_q)

    @property
    def signs(self) -> np.ndarray:
        return 1 - 2 * self.table.astype(np.int8)

    @property
    def anf(self) -> np.ndarray:
        if not self._anf:
            self._anf.append(anf_from_dense(self.table))
        return self._anf[0]

    def __call__(self, k) -> int:
        return int(self.table[int(k)])

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.n_q == other.n_q and bool(np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n_q, self.table.tobytes()))

    def to_hex(self) -> str:
        return np.packbits(self.table, bitorder="little").tobytes().hex()

    def complement(self) -> "BooleanFunction":
        return BooleanFunction(self.table ^ 1, self.n_q)


@dataclass(frozen=True)
class Concept:
    """Target mask alpha; its most significant bit (the control qubit) is set."""

    alpha: int
    n_q: int

    def __post_init__(self):
        BitString(self.alpha, self.n_q)
        if not (self.alpha >> (self.n_q - 1)) & 1:
            raise ValueError("alpha must have its final (control) bit set")

    @property
    def weight(self) -> int:
        return popcount(self.alpha)

    @property
    def control(self) -> int:
        return self.n_q - 1

    @property
    def targets(self) -> list:
        return [j for j in range(self.n_q - 1) if (self.alpha >> j) & 1]


def concept_for_rule(n_q: int, rule="full", weight=None) -> Concept:
    """Concept from a rule: 'full' (|alpha| = n_q), 'half' (n_q // 2) or an explicit weight.

    Active non-control qubits are taken from the low end.
    """
    if rule == "full":
        w = n_q
    elif rule == "half":
        w = max(1, n_q // 2)
    elif rule == "explicit":
        if weight is None:
            raise ValueError("explicit rule needs a weight")
        w = int(weight)
    else:
        raise ValueError(f"unknown alpha rule {rule!r}")
    if not 1 <= w <= n_q:
        raise ValueError("weight out of range")
    alpha = (1 << (n_q - 1)) | ((1 << (w - 1)) - 1)
    return Concept(alpha, n_q)


def random_function(n_q: int, rng, cap: int = MAX_DENSE_QUBITS) -> BooleanFunction:
    if n_q > cap:
        raise CapExceededError(f"n_q={n_q} exceeds the dense cap {cap}")
    gen = as_generator(rng)
    return BooleanFunction(gen.integers(0, 2, size=1 << n_q, dtype=np.uint8), n_q)


def build_phase_state(f: BooleanFunction) -> np.ndarray:
    return f.signs.astype(np.complex128) / np.sqrt(float(1 << f.n_q))


def target_bit(f: BooleanFunction, y, alpha) -> int:
    """b = f(y) xor f(y xor alpha) for y with a cleared control bit."""
    a = alpha.alpha if isinstance(alpha, Concept) else int(alpha)
    y = int(y)
    if (y >> (f.n_q - 1)) & 1:
        raise ValueError("y must have its final bit equal to 0")
    return int(f.table[y] ^ f.table[y ^ a])


def basis_state(n_q: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << n_q, dtype=np.complex128)
    psi[int(index)] = 1.0
    return psi


def sample_input_state(f: BooleanFunction, rng, basis_probability: float = 0.0):
    """Phase state of f, or with the given probability a random computational-basis state.

    Returns (state, is_basis_state). Optional input source; not used by the
    main pipelines.
    """
    gen = as_generator(rng)
    if basis_probability > 0 and gen.random() < basis_probability:
        return basis_state(f.n_q, gen.integers(0, 1 << f.n_q)), True
    return build_phase_state(f), False
