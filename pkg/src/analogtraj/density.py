"""Dense density-matrix evolution, the reference every sampler is checked against.

Deliberately independent of the statevector kernels: operators are applied
with ``einsum`` on a ``(2,)*2N`` tensor view.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import NoiseChannel, kraus_operators
from .errors import CapacityError, DimensionError
from .pauli import PauliString, enumerate_strings
from .statevector import Observable

MAX_DM_QUBITS = 12
_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass
class DensityMatrix:
    entries: np.ndarray
    num_qubits: int

    def __post_init__(self):
        if self.num_qubits > MAX_DM_QUBITS:
            raise CapacityError(
                f"{self.num_qubits} qubits exceeds the density-matrix cap of {MAX_DM_QUBITS}"
            )
        d = 1 << self.num_qubits
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (d, d):
            raise DimensionError(f"shape {self.entries.shape} is not {d}x{d}")

    @classmethod
    def from_state(cls, amplitudes, num_qubits=None) -> DensityMatrix:
        psi = np.asarray(amplitudes, dtype=complex).ravel()
        n = psi.size.bit_length() - 1 if num_qubits is None else num_qubits
        if n > MAX_DM_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the density-matrix cap of {MAX_DM_QUBITS}")
        return cls(np.outer(psi, psi.conj()), n)

    @classmethod
    def from_bitstring(cls, bits: str) -> DensityMatrix:
        psi = np.zeros(1 << len(bits), dtype=complex)
        psi[int(bits, 2)] = 1.0
        return cls.from_state(psi, len(bits))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.entries.copy(), self.num_qubits)


def _conjugate(entries, left, right, qubits, n):
    """left @ rho @ right on the listed qubits, with ``right`` already daggered."""
    k = len(qubits)
    t = entries.reshape((2,) * (2 * n))
    row = list(_LETTERS[:n])
    col = list(_LETTERS[n : 2 * n])
    new = _LETTERS[2 * n : 2 * n + k]
    new_c = _LETTERS[2 * n + k : 2 * n + 2 * k]
    lt = left.reshape((2,) * (2 * k))
    rt = right.reshape((2,) * (2 * k))
    out_row, out_col = row[:], col[:]
    for i, q in enumerate(qubits):
        out_row[q] = new[i]
        out_col[q] = new_c[i]
    spec = (
        "".join(new) + "".join(row[q] for q in qubits) + ","
        + "".join(row + col) + ","
        + "".join(col[q] for q in qubits) + "".join(new_c) + "->"
        + "".join(out_row + out_col)
    )
    return np.einsum(spec, lt, t, rt, optimize=True).reshape(entries.shape)


def _check(rho: DensityMatrix, matrix, qubits):
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < rho.num_qubits for q in qubits):
        raise DimensionError(f"bad qubits {qubits} for {rho.num_qubits} qubits")
    if matrix is not None and matrix.shape != (1 << len(qubits),) * 2:
        raise DimensionError(f"matrix shape {matrix.shape} does not match {len(qubits)} qubits")
    return qubits


def apply_unitary_dm(rho: DensityMatrix, matrix, qubits) -> DensityMatrix:
    """rho <- U rho U^dagger on ``qubits``; returns a new matrix."""
    u = np.asarray(matrix, dtype=complex)
    qubits = _check(rho, u, qubits)
    return DensityMatrix(_conjugate(rho.entries, u, u.conj().T, qubits, rho.num_qubits), rho.num_qubits)


def apply_channel_dm(rho: DensityMatrix, channel: NoiseChannel, qubits=None) -> DensityMatrix:
    """rho <- sum_q w_q M_q rho M_q^dagger."""
    qubits = tuple(channel.support) if qubits is None else tuple(qubits)
    qubits = _check(rho, None, qubits)
    if len(qubits) != channel.num_qubits:
        raise DimensionError(f"{channel.num_qubits}-qubit channel on {qubits}")
    out = np.zeros_like(rho.entries)
    for w, m in kraus_operators(channel):
        out += w * _conjugate(rho.entries, m, m.conj().T, qubits, rho.num_qubits)
    return DensityMatrix(out, rho.num_qubits)


def _pauli_dense(s: PauliString, qubits, n) -> np.ndarray:
    labels = ["I"] * n
    for ch, q in zip(s.label, qubits):
        labels[q] = ch
    return PauliString.from_label("".join(labels)).matrix()


def expectation_dm(rho: DensityMatrix, obs: Observable) -> float:
    n = rho.num_qubits
    if obs.kind == "projector":
        idx = np.arange(1 << n)
        ones = np.array([bin(i).count("1") for i in idx])
        mask = (n - 2 * ones) == obs.sector
        return float(np.real(np.diag(rho.entries)[mask].sum()))
    if obs.kind == "entropy":
        cut = obs.sector
        t = rho.entries.reshape(1 << cut, 1 << (n - cut), 1 << cut, 1 << (n - cut))
        red = np.einsum("ajbj->ab", t)
        w = np.linalg.eigvalsh(red)
        w = w[w > 1e-15]
        return float(-(w * np.log(w)).sum())
    total = 0.0
    for coef, s, qubits in obs.terms:
        total += coef * float(np.real(np.trace(_pauli_dense(s, qubits, n) @ rho.entries)))
    return total


def initial_dm(circuit) -> DensityMatrix:
    return DensityMatrix.from_state(circuit.initial_state().amplitudes, circuit.num_qubits)


def evolve_circuit_dm(circuit, observables=None, record_every_step: bool = True) -> np.ndarray:
    """Exact expectation values, shape (record points, observables).

    With ``record_every_step`` false only the final record point is returned.
    """
    if circuit.num_qubits > MAX_DM_QUBITS:
        raise CapacityError(
            f"{circuit.num_qubits} qubits exceeds the density-matrix cap of {MAX_DM_QUBITS}"
        )
    obs = [o for _, o in circuit.observables] if observables is None else list(observables)
    rho = initial_dm(circuit)
    rows = []
    done = 0
    for point in circuit.record_points:
        for op in circuit.ops[done:point]:
            rho = apply_unitary_dm(rho, op.matrix(), op.qubits)
            if op.noise is not None:
                rho = apply_channel_dm(rho, op.noise, op.qubits)
        done = point
        rows.append([expectation_dm(rho, o) for o in obs])
    out = np.array(rows, dtype=float).reshape(len(rows), len(obs))
    return out if record_every_step else out[-1:]


def final_dm(circuit) -> DensityMatrix:
    rho = initial_dm(circuit)
    for op in circuit.ops:
        rho = apply_unitary_dm(rho, op.matrix(), op.qubits)
        if op.noise is not None:
            rho = apply_channel_dm(rho, op.noise, op.qubits)
    return rho


# ---------------------------------------------------------------------------
# Pauli transfer matrices
# ---------------------------------------------------------------------------


def pauli_transfer_matrix(kraus, num_qubits: int) -> np.ndarray:
    """R_ij = tr(P_i N(P_j)) / 2^M over the enumerated strings, for (weight, matrix) pairs."""
    strings = enumerate_strings(num_qubits)
    mats = [s.matrix() for s in strings]
    d = 1 << num_qubits
    r = np.zeros((len(mats), len(mats)))
    for j, pj in enumerate(mats):
        out = sum(w * m @ pj @ m.conj().T for w, m in kraus)
        for i, pi in enumerate(mats):
            r[i, j] = np.real(np.trace(pi @ out)) / d
    return r


def pauli_channel_ptm(probs: dict) -> np.ndarray:
    m = next(iter(probs)).num_qubits
    return pauli_transfer_matrix([(p, s.matrix()) for s, p in probs.items()], m)


def factorized_ptm(factors: dict, num_qubits: int) -> np.ndarray:
    """PTM of the composition of single-string channels (1 - q) rho + q S rho S."""
    ident = np.eye(1 << num_qubits)
    total = np.eye(4**num_qubits)
    for s, q in factors.items():
        total = pauli_transfer_matrix([(1.0 - q, ident), (q, s.matrix())], num_qubits) @ total
    return total
