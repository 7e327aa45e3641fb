"""Pauli strings in symplectic (x, z) bitmask form.

Bit ``k`` of ``x_bits``/``z_bits`` refers to qubit ``k`` of the string, and
qubit 0 is the leftmost character of the text form (``"XY"`` is X on qubit 0,
Y on qubit 1). Product phases are not tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .errors import CapacityError, DimensionError

MAX_ENUMERATION_QUBITS = 8

_CHAR_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_CHAR = {v: k for k, v in _CHAR_TO_BITS.items()}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, order=True)
class PauliString:
    x_bits: int
    z_bits: int
    num_qubits: int

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DimensionError("a Pauli string needs at least one qubit")
        limit = 1 << self.num_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise DimensionError(f"bitmask out of range for {self.num_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        label = label.strip().upper()
        if not label:
            raise DimensionError("empty Pauli label")
        x = z = 0
        for k, ch in enumerate(label):
            try:
                bx, bz = _CHAR_TO_BITS[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r} in {label!r}") from None
            x |= bx << k
            z |= bz << k
        return cls(x, z, len(label))

    @classmethod
    def identity(cls, num_qubits: int) -> PauliString:
        return cls(0, 0, num_qubits)

    @property
    def label(self) -> str:
        return "".join(
            _BITS_TO_CHAR[((self.x_bits >> k) & 1, (self.z_bits >> k) & 1)]
            for k in range(self.num_qubits)
        )

    @property
    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    @property
    def num_y(self) -> int:
        return (self.x_bits & self.z_bits).bit_count()

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    def matrix(self) -> np.ndarray:
        """Dense 2^M x 2^M matrix; qubit 0 is the most significant tensor factor."""
        return reduce(np.kron, (_SINGLE[c] for c in self.label))

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


def _check_same_size(s1: PauliString, s2: PauliString) -> None:
    if s1.num_qubits != s2.num_qubits:
        raise DimensionError(
            f"Pauli strings act on {s1.num_qubits} and {s2.num_qubits} qubits"
        )


def commutes(s1: PauliString, s2: PauliString) -> bool:
    """True iff ``s1 s2 == s2 s1`` (even number of anticommuting sites)."""
    _check_same_size(s1, s2)
    parity = ((s1.x_bits & s2.z_bits) ^ (s1.z_bits & s2.x_bits)).bit_count() & 1
    return parity == 0


@lru_cache(maxsize=None)
def _enumerate(num_qubits: int) -> tuple[PauliString, ...]:
    n = 1 << num_qubits
    return tuple(PauliString(x, z, num_qubits) for x in range(n) for z in range(n))


def enumerate_strings(num_qubits: int) -> list[PauliString]:
    """All 4^M strings, ordered lexicographically on (x_bits, z_bits); identity first."""
    if not 1 <= num_qubits <= MAX_ENUMERATION_QUBITS:
        raise CapacityError(
            f"enumeration supports 1..{MAX_ENUMERATION_QUBITS} qubits, got {num_qubits}"
        )
    return list(_enumerate(num_qubits))


def anticommutant(s: PauliString) -> list[PauliString]:
    """The strings of the same size that anticommute with ``s``."""
    return [t for t in enumerate_strings(s.num_qubits) if not commutes(s, t)]


@lru_cache(maxsize=None)
def anticommutation_table(num_qubits: int) -> np.ndarray:
    """Boolean matrix A[i, j] = strings i and j anticommute, in enumeration order."""
    strings = enumerate_strings(num_qubits)
    x = np.array([s.x_bits for s in strings], dtype=np.int64)
    z = np.array([s.z_bits for s in strings], dtype=np.int64)
    sym = (x[:, None] & z[None, :]) ^ (z[:, None] & x[None, :])
    parity = np.zeros_like(sym)
    for k in range(num_qubits):
        parity ^= (sym >> k) & 1
    table = parity.astype(bool)
    table.setflags(write=False)
    return table


def string_index(s: PauliString) -> int:
    """Position of ``s`` in :func:`enumerate_strings` order."""
    return (s.x_bits << s.num_qubits) | s.z_bits
