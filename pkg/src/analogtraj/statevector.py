"""Dense statevector simulation.

Amplitude index convention: qubit ``q`` of an ``N``-qubit register is bit
``N - 1 - q`` of the amplitude index, so the bitstring ``"0001"`` (qubit 0
leftmost) is index 1. Multi-qubit matrices are indexed as the Kronecker
product over the listed qubits in order.

Two layers live here. The module-level kernels operate in place on a batch
``psi`` of shape ``(B, 2**N)`` so the trajectory harness can advance many
trajectories per call; :class:`StateVector` and the functions taking one are
the single-state API on top of the same kernels.

Nothing in this module renormalizes a state. Expectation values are
``<psi|O|psi>`` without dividing by ``<psi|psi>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import CapacityError, ContractError, DimensionError
from .pauli import PauliString

MAX_QUBITS = 26
NORM_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# batched in-place kernels
# ---------------------------------------------------------------------------


@nb.njit(cache=True)
def _apply_1q(psi, mats, bit):
    B, D = psi.shape
    step = 1 << bit
    shared = mats.shape[0] == 1
    for b in range(B):
        m = mats[0] if shared else mats[b]
        m00 = m[0, 0]
        m01 = m[0, 1]
        m10 = m[1, 0]
        m11 = m[1, 1]
        row = psi[b]
        if m01 == 0 and m10 == 0:
            for a in range(0, D, 2 * step):
                for i in range(a, a + step):
                    row[i] *= m00
                    row[i + step] *= m11
        else:
            for a in range(0, D, 2 * step):
                for i in range(a, a + step):
                    a0 = row[i]
                    a1 = row[i + step]
                    row[i] = m00 * a0 + m01 * a1
                    row[i + step] = m10 * a0 + m11 * a1


@nb.njit(cache=True)
def _apply_2q(psi, mats, bit0, bit1):
    B, D = psi.shape
    s0 = 1 << bit0
    s1 = 1 << bit1
    lo = min(bit0, bit1)
    hi = max(bit0, bit1)
    slo = 1 << lo
    shi = 1 << hi
    shared = mats.shape[0] == 1
    for b in range(B):
        m = mats[0] if shared else mats[b]
        row = psi[b]
        diagonal = True
        for r in range(4):
            for c in range(4):
                if r != c and m[r, c] != 0:
                    diagonal = False
        if diagonal:
            d0 = m[0, 0]
            d1 = m[1, 1]
            d2 = m[2, 2]
            d3 = m[3, 3]
            for a in range(0, D, 2 * shi):
                for c in range(a, a + shi, 2 * slo):
                    for i in range(c, c + slo):
                        row[i] *= d0
                        row[i | s1] *= d1
                        row[i | s0] *= d2
                        row[i | s0 | s1] *= d3
            continue
        m00 = m[0, 0]
        m01 = m[0, 1]
        m02 = m[0, 2]
        m03 = m[0, 3]
        m10 = m[1, 0]
        m11 = m[1, 1]
        m12 = m[1, 2]
        m13 = m[1, 3]
        m20 = m[2, 0]
        m21 = m[2, 1]
        m22 = m[2, 2]
        m23 = m[2, 3]
        m30 = m[3, 0]
        m31 = m[3, 1]
        m32 = m[3, 2]
        m33 = m[3, 3]
        for a in range(0, D, 2 * shi):
            for c in range(a, a + shi, 2 * slo):
                for i in range(c, c + slo):
                    i01 = i | s1
                    i10 = i | s0
                    i11 = i01 | s0
                    a0 = row[i]
                    a1 = row[i01]
                    a2 = row[i10]
                    a3 = row[i11]
                    row[i] = m00 * a0 + m01 * a1 + m02 * a2 + m03 * a3
                    row[i01] = m10 * a0 + m11 * a1 + m12 * a2 + m13 * a3
                    row[i10] = m20 * a0 + m21 * a1 + m22 * a2 + m23 * a3
                    row[i11] = m30 * a0 + m31 * a1 + m32 * a2 + m33 * a3


@nb.njit(cache=True)
def _popcount_parity(v):
    p = 0
    while v:
        v &= v - 1
        p ^= 1
    return p


@nb.njit(cache=True)
def _pauli_phase(ny):
    r = ny % 4
    if r == 0:
        return 1.0 + 0.0j
    if r == 1:
        return 1.0j
    if r == 2:
        return -1.0 + 0.0j
    return -1.0j


@nb.njit(cache=True)
def _pauli_rotation(psi, xmask, zmask, ny, cos_t, sin_t):
    # psi <- cos(t) psi + i sin(t) S psi, with S|b> = i^ny (-1)^{|b & z|} |b ^ x>
    B, D = psi.shape
    phase = _pauli_phase(ny)
    for b in range(B):
        c = cos_t[b]
        s = 1j * sin_t[b] * phase
        row = psi[b]
        if xmask == 0:
            for i in range(D):
                sign = 1.0 - 2.0 * _popcount_parity(i & zmask)
                row[i] = (c + s * sign) * row[i]
        else:
            # pairs (i, i ^ xmask) are visited once, from the member with
            # the highest bit of xmask cleared
            hb = 0
            v = xmask
            while v > 1:
                v >>= 1
                hb += 1
            top = 1 << hb
            for i in range(D):
                if i & top:
                    continue
                j = i ^ xmask
                ai = row[i]
                aj = row[j]
                si = 1.0 - 2.0 * _popcount_parity(i & zmask)
                sj = 1.0 - 2.0 * _popcount_parity(j & zmask)
                # (S psi)[j] = phase * sign(i) * psi[i]
                row[j] = c * aj + s * si * ai
                row[i] = c * ai + s * sj * aj


@nb.njit(cache=True)
def _pauli_expectation(psi, xmask, zmask, ny):
    B, D = psi.shape
    out = np.zeros(B, dtype=np.complex128)
    phase = _pauli_phase(ny)
    for b in range(B):
        row = psi[b]
        acc = 0.0 + 0.0j
        for i in range(D):
            sign = 1.0 - 2.0 * _popcount_parity(i & zmask)
            acc += np.conj(row[i ^ xmask]) * sign * row[i]
        out[b] = phase * acc
    return out


def _bits_for(qubits, num_qubits):
    return [num_qubits - 1 - q for q in qubits]


def _check_qubits(qubits, num_qubits):
    if len(set(qubits)) != len(qubits):
        raise DimensionError(f"repeated qubit in {qubits}")
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise DimensionError(f"qubit {q} out of range for {num_qubits} qubits")


def apply_matrix_batch(psi: np.ndarray, mats: np.ndarray, qubits, num_qubits: int) -> None:
    """Apply 2x2/4x4 matrices in place; ``mats`` is ``(d, d)``, ``(1, d, d)`` or ``(B, d, d)``."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.ndim == 2:
        mats = mats[None]
    d = 1 << len(qubits)
    if mats.shape[1:] != (d, d):
        raise DimensionError(f"matrix shape {mats.shape[1:]} does not match {len(qubits)} qubits")
    if mats.shape[0] not in (1, psi.shape[0]):
        raise DimensionError("one matrix per trajectory or a single shared matrix expected")
    bits = _bits_for(qubits, num_qubits)
    mats = np.ascontiguousarray(mats)
    if len(qubits) == 1:
        _apply_1q(psi, mats, bits[0])
    elif len(qubits) == 2:
        _apply_2q(psi, mats, bits[0], bits[1])
    else:
        raise DimensionError("only one- and two-qubit matrices are supported")


def global_masks(s: PauliString, qubits, num_qubits: int) -> tuple[int, int]:
    """Translate a local Pauli string on ``qubits`` into amplitude-index masks."""
    if len(qubits) != s.num_qubits:
        raise DimensionError(f"{s.num_qubits}-qubit string placed on {len(qubits)} qubits")
    xm = zm = 0
    for k, q in enumerate(qubits):
        bit = 1 << (num_qubits - 1 - q)
        if (s.x_bits >> k) & 1:
            xm |= bit
        if (s.z_bits >> k) & 1:
            zm |= bit
    return xm, zm


def pauli_rotation_batch(psi, s: PauliString, qubits, num_qubits, thetas) -> None:
    thetas = np.broadcast_to(np.asarray(thetas, dtype=float), (psi.shape[0],))
    xm, zm = global_masks(s, qubits, num_qubits)
    _pauli_rotation(psi, xm, zm, s.num_y, np.cos(thetas), np.sin(thetas))


def pauli_expectation_batch(psi, s: PauliString, qubits, num_qubits) -> np.ndarray:
    xm, zm = global_masks(s, qubits, num_qubits)
    return _pauli_expectation(psi, xm, zm, s.num_y)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observable:
    """A real observable evaluated on trajectories.

    ``kind`` is ``"pauli_sum"`` (``terms`` holds ``(coef, PauliString, qubits)``),
    ``"projector"`` (diagonal projector onto total-Z eigenvalue ``sector``) or
    ``"entropy"`` (bipartite entropy of the normalized state at cut ``sector``).
    """

    kind: str = "pauli_sum"
    terms: tuple = ()
    sector: int = 0

    def __post_init__(self):
        if self.kind not in ("pauli_sum", "projector", "entropy"):
            raise ValueError(f"unknown observable kind {self.kind!r}")

    def max_qubit(self) -> int:
        if self.kind != "pauli_sum" or not self.terms:
            return -1
        return max(max(q) for _, _, q in self.terms)

    def to_json(self) -> dict:
        if self.kind != "pauli_sum":
            return {"kind": self.kind, "sector": self.sector}
        return {
            "kind": self.kind,
            "terms": [[c, s.label, list(q)] for c, s, q in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> Observable:
        kind = data.get("kind", "pauli_sum")
        if kind != "pauli_sum":
            return cls(kind=kind, sector=int(data["sector"]))
        return pauli_sum([(float(c), lab, tuple(q)) for c, lab, q in data["terms"]])


def pauli_sum(terms) -> Observable:
    """Build a Pauli-sum observable from ``(coef, label_or_string, qubits)`` triples."""
    out = []
    for coef, s, qubits in terms:
        if isinstance(s, str):
            s = PauliString.from_label(s)
        qubits = tuple(int(q) for q in qubits)
        if len(qubits) != s.num_qubits:
            raise DimensionError(f"term {s} placed on {qubits}")
        out.append((float(coef), s, qubits))
    return Observable("pauli_sum", tuple(out))


def magnetization_x(num_qubits: int) -> Observable:
    """S_x = (1/N) sum_j X_j."""
    return pauli_sum([(1.0 / num_qubits, "X", (j,)) for j in range(num_qubits)])


def staggered_magnetization_z(num_qubits: int) -> Observable:
    """(1/N) sum_j (-1)^j Z_j, with qubit 0 carrying sign +1."""
    return pauli_sum(
        [((-1.0) ** j / num_qubits, "Z", (j,)) for j in range(num_qubits)]
    )


def sector_projector(sector: int) -> Observable:
    """Projector onto basis states with sum_j Z_j equal to ``sector``."""
    return Observable("projector", (), int(sector))


def half_cut_entropy(num_qubits: int) -> Observable:
    return Observable("entropy", (), num_qubits // 2)


def _sector_mask(num_qubits: int, sector: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    ones = np.zeros_like(idx)
    for k in range(num_qubits):
        ones += (idx >> k) & 1
    return (num_qubits - 2 * ones) == sector


def expectation_batch(psi: np.ndarray, obs: Observable, num_qubits: int) -> np.ndarray:
    """Unnormalized expectation for each row of ``psi``; returns real ``(B,)``."""
    if obs.kind == "projector":
        mask = _sector_mask(num_qubits, obs.sector)
        return np.sum(np.abs(psi[:, mask]) ** 2, axis=1)
    if obs.kind == "entropy":
        return entropy_batch(psi, obs.sector, num_qubits, normalize=True)
    if obs.max_qubit() >= num_qubits:
        raise DimensionError("observable support exceeds the register")
    total = np.zeros(psi.shape[0], dtype=np.complex128)
    for coef, s, qubits in obs.terms:
        total += coef * pauli_expectation_batch(psi, s, qubits, num_qubits)
    return total.real


def entropy_batch(psi, cut: int, num_qubits: int, normalize: bool = False) -> np.ndarray:
    if not 1 <= cut <= num_qubits - 1:
        raise DimensionError(f"cut {cut} outside [1, {num_qubits - 1}]")
    mats = psi.reshape(psi.shape[0], 1 << cut, 1 << (num_qubits - cut))
    sv = np.linalg.svd(mats, compute_uv=False)
    w = sv**2
    if normalize:
        w = w / np.sum(w, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(w > 1e-300, -w * np.log(w), 0.0)
    return terms.sum(axis=1)


# ---------------------------------------------------------------------------
# single-state API
# ---------------------------------------------------------------------------


@dataclass
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int = field(default=-1)

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128).ravel()
        n = self.amplitudes.size.bit_length() - 1
        if self.num_qubits < 0:
            self.num_qubits = n
        if self.amplitudes.size != 1 << self.num_qubits:
            raise DimensionError(
                f"{self.amplitudes.size} amplitudes do not describe {self.num_qubits} qubits"
            )
        if self.num_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.num_qubits} qubits exceeds the cap of {MAX_QUBITS}")

    @classmethod
    def zeros(cls, num_qubits: int) -> StateVector:
        return cls.from_bitstring("0" * num_qubits)

    @classmethod
    def from_bitstring(cls, bits: str) -> StateVector:
        n = len(bits)
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[int(bits, 2) if bits else 0] = 1.0
        return cls(amps, n)

    @classmethod
    def plus_state(cls, num_qubits: int) -> StateVector:
        if num_qubits > MAX_QUBITS:
            raise CapacityError(f"{num_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        d = 1 << num_qubits
        return cls(np.full(d, d**-0.5, dtype=np.complex128), num_qubits)

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def batch(self) -> np.ndarray:
        return self.amplitudes.reshape(1, -1)


def apply_gate(state: StateVector, matrix, qubits) -> StateVector:
    """Apply a (possibly non-unitary) one- or two-qubit matrix in place."""
    qubits = tuple(int(q) for q in qubits)
    _check_qubits(qubits, state.num_qubits)
    matrix = np.asarray(matrix, dtype=np.complex128)
    d = 1 << len(qubits)
    if matrix.shape != (d, d):
        raise DimensionError(f"matrix shape {matrix.shape} does not match {len(qubits)} qubits")
    apply_matrix_batch(state.batch, matrix, qubits, state.num_qubits)
    return state


def apply_pauli_rotation(state: StateVector, s: PauliString, qubits, theta: float) -> StateVector:
    """state <- (cos(theta) I + i sin(theta) S) state, in place."""
    qubits = tuple(int(q) for q in qubits)
    _check_qubits(qubits, state.num_qubits)
    pauli_rotation_batch(state.batch, s, qubits, state.num_qubits, [theta])
    return state


def expectation(state: StateVector, obs: Observable) -> float:
    if obs.kind == "entropy":
        return bipartite_entropy(state, obs.sector)
    return float(expectation_batch(state.batch, obs, state.num_qubits)[0])


def _require_normalized(state: StateVector) -> None:
    n2 = float(np.vdot(state.amplitudes, state.amplitudes).real)
    if abs(n2 - 1.0) > NORM_TOLERANCE:
        raise ContractError(f"state is not normalized (norm^2 = {n2:.12g})")


def probabilities(state: StateVector) -> np.ndarray:
    _require_normalized(state)
    return np.abs(state.amplitudes) ** 2


def bitstring_probability(state: StateVector, bits) -> float:
    """|<bits|psi>|^2; ``bits`` is a bitstring with qubit 0 leftmost, or its integer index."""
    _require_normalized(state)
    index = int(bits, 2) if isinstance(bits, str) else int(bits)
    return float(abs(state.amplitudes[index]) ** 2)


def top_k_probabilities(state: StateVector, k: int) -> list[tuple[str, float]]:
    """The ``k`` most likely bitstrings, descending; ties broken by integer value."""
    p = probabilities(state)
    order = top_k_indices(p, k)
    n = state.num_qubits
    return [(format(int(i), f"0{n}b"), float(p[i])) for i in order]


def top_k_indices(p: np.ndarray, k: int) -> np.ndarray:
    idx = np.arange(p.size)
    order = np.lexsort((idx, -p))
    return order[:k]


def bipartite_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (nats) of the first ``cut`` qubits."""
    if not 1 <= cut <= state.num_qubits - 1:
        raise DimensionError(f"cut {cut} outside [1, {state.num_qubits - 1}]")
    _require_normalized(state)
    return float(entropy_batch(state.batch, cut, state.num_qubits)[0])
