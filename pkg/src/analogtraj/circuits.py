"""Noisy circuits and the benchmark circuit builders.

Rotation gates follow ``r_P(theta) = exp(i theta P)``. A circuit records its
observables after a chosen number of ops (``record_points``); ``0`` means the
initial state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .channels import NoiseChannel, channel_from_json, channel_to_json
from .errors import CapacityError, ConfigurationError, DimensionError
from .statevector import (
    MAX_QUBITS,
    Observable,
    StateVector,
    apply_gate,
    half_cut_entropy,
    magnetization_x,
    pauli_sum,
    sector_projector,
    staggered_magnetization_z,
)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_PAULI = {"x": _X, "y": _Y, "z": _Z}

ROTATIONS = {"rx": "x", "ry": "y", "rz": "z", "rxx": "xx", "ryy": "yy", "rzz": "zz"}
FIXED = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0),
    "x": _X,
    "y": _Y,
    "z": _Z,
    "i": _I2,
}
GATES = tuple(ROTATIONS) + tuple(FIXED)


def gate_arity(name: str) -> int:
    if name in FIXED:
        return 1
    if name in ROTATIONS:
        return len(ROTATIONS[name])
    raise ConfigurationError(f"unknown gate {name!r}; choose from {GATES}")


@lru_cache(maxsize=4096)
def _rotation(name: str, angle: float) -> np.ndarray:
    axes = ROTATIONS[name]
    p = _PAULI[axes[0]]
    for a in axes[1:]:
        p = np.kron(p, _PAULI[a])
    m = math.cos(angle) * np.eye(p.shape[0]) + 1j * math.sin(angle) * p
    m.setflags(write=False)
    return m


def gate_matrix(name: str, angle: float = 0.0) -> np.ndarray:
    """Dense matrix of a named gate."""
    if name in FIXED:
        return FIXED[name]
    if name in ROTATIONS:
        return _rotation(name, float(angle))
    raise ConfigurationError(f"unknown gate {name!r}; choose from {GATES}")


@dataclass(frozen=True)
class Op:
    gate: str
    qubits: tuple[int, ...]
    angle: float = 0.0
    noise: NoiseChannel | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if gate_arity(self.gate) != len(self.qubits):
            raise DimensionError(f"gate {self.gate} on {len(self.qubits)} qubits")
        if len(set(self.qubits)) != len(self.qubits):
            raise DimensionError(f"repeated qubit in {self.qubits}")
        if self.noise is not None:
            if not self.noise.support:
                object.__setattr__(self, "noise", self.noise.on(self.qubits))
            elif tuple(self.noise.support) != self.qubits:
                raise DimensionError(
                    f"noise support {self.noise.support} differs from gate qubits {self.qubits}"
                )

    def matrix(self) -> np.ndarray:
        return gate_matrix(self.gate, self.angle)


@dataclass(frozen=True)
class NoisyCircuit:
    num_qubits: int
    ops: tuple[Op, ...]
    initial: str = "0"
    record_points: tuple[int, ...] = ()
    observables: tuple[tuple[str, Observable], ...] = ()
    record_distribution: bool = False

    def __post_init__(self):
        n = self.num_qubits
        if n < 1:
            raise DimensionError("a circuit needs at least one qubit")
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
        if self.initial != "+":
            if len(self.initial) == 1 and n > 1 and self.initial in "01":
                object.__setattr__(self, "initial", self.initial * n)
            if len(self.initial) != n or set(self.initial) - set("01"):
                raise ConfigurationError(f"initial state {self.initial!r} is not '+' or {n} bits")
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if max(op.qubits) >= n:
                raise DimensionError(f"op {op.gate}{op.qubits} outside {n} qubits")
        pts = tuple(int(p) for p in self.record_points) or (len(self.ops),)
        if any(b < a for a, b in zip(pts, pts[1:])) or pts[0] < 0 or pts[-1] > len(self.ops):
            raise ConfigurationError("record points must be nondecreasing op counts")
        object.__setattr__(self, "record_points", pts)
        object.__setattr__(self, "observables", tuple(self.observables))

    @property
    def observable_names(self) -> list[str]:
        return [name for name, _ in self.observables]

    def initial_state(self) -> StateVector:
        if self.initial == "+":
            return StateVector.plus_state(self.num_qubits)
        return StateVector.from_bitstring(self.initial)

    def strip_noise(self) -> NoisyCircuit:
        return replace(self, ops=tuple(replace(op, noise=None) for op in self.ops))

    def noise_count(self) -> int:
        return sum(op.noise is not None for op in self.ops)

    def channels(self) -> set[NoiseChannel]:
        return {op.noise.without_support() for op in self.ops if op.noise is not None}

    def noiseless_series(self) -> np.ndarray:
        """Observable series of the noiseless circuit, shape (record points, observables)."""
        from .statevector import expectation

        state = self.initial_state()
        out = np.zeros((len(self.record_points), len(self.observables)))
        done = 0
        for r, point in enumerate(self.record_points):
            for op in self.ops[done:point]:
                apply_gate(state, op.matrix(), op.qubits)
            done = point
            out[r] = [expectation(state, obs) for _, obs in self.observables]
        return out

    # -- JSON ----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "initial": self.initial,
            "ops": [
                {
                    "gate": op.gate,
                    "qubits": list(op.qubits),
                    "angle": op.angle,
                    "noise": None if op.noise is None else channel_to_json(op.noise),
                }
                for op in self.ops
            ],
            "record_points": list(self.record_points),
            "observables": {name: obs.to_json() for name, obs in self.observables},
            "record_distribution": self.record_distribution,
        }

    @classmethod
    def from_json(cls, data: dict) -> NoisyCircuit:
        try:
            ops = [
                Op(
                    o["gate"],
                    tuple(o["qubits"]),
                    float(o.get("angle", 0.0)),
                    None if o.get("noise") is None else channel_from_json(o["noise"]),
                )
                for o in data["ops"]
            ]
            obs = tuple(
                (name, Observable.from_json(spec))
                for name, spec in data.get("observables", {}).items()
            )
            return cls(
                num_qubits=int(data["num_qubits"]),
                ops=tuple(ops),
                initial=str(data.get("initial", "0")),
                record_points=tuple(data.get("record_points", ())),
                observables=obs,
                record_distribution=bool(data.get("record_distribution", False)),
            )
        except KeyError as exc:
            raise ConfigurationError(f"circuit JSON is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad circuit JSON: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def load_circuit(path) -> NoisyCircuit:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
            ) from None
    return NoisyCircuit.from_json(data)


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        norm = sorted({(min(a, b), max(a, b)) for a, b in self.edges})
        if any(a == b for a, b in norm):
            raise ConfigurationError("graph has a self-loop")
        if len(norm) != len(self.edges):
            raise ConfigurationError("graph has repeated edges")
        if norm and norm[-1][1] >= self.num_vertices:
            raise ConfigurationError("edge endpoint outside the vertex range")
        object.__setattr__(self, "edges", tuple(norm))

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg


def random_3_regular_graph(num_vertices: int, seed: int) -> Graph:
    """Uniform pairing model with rejection of loops and multi-edges."""
    n = int(num_vertices)
    if n < 4 or n % 2:
        raise ConfigurationError(f"a 3-regular graph needs an even N >= 4, got {n}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), 3)
    while True:
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(int(min(a, b)), int(max(a, b))) for a, b in pairs}
        if len(edges) == len(pairs):
            graph = Graph(n, tuple(edges))
            assert all(d == 3 for d in graph.degrees())
            return graph


def cycle_graph(num_vertices: int) -> Graph:
    n = num_vertices
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


# ---------------------------------------------------------------------------
# benchmark builders
# ---------------------------------------------------------------------------


def _two_qubit(gate, a, b, angle, noise):
    return Op(gate, (a, b), angle, None if noise is None else noise.on((a, b)))


def lattice_edges(lx: int, ly: int) -> list[tuple[int, int]]:
    """Periodic square-lattice bonds, horizontal then vertical, row-major.

    Site (x, y) is qubit ``y * lx + x``. A side of length 2 contributes each
    wrapped bond once.
    """
    horiz, vert = [], []
    for y in range(ly):
        for x in range(lx):
            if lx > 2 or x + 1 < lx:
                horiz.append((y * lx + x, y * lx + (x + 1) % lx))
    for y in range(ly):
        for x in range(lx):
            if ly > 2 or y + 1 < ly:
                vert.append((y * lx + x, ((y + 1) % ly) * lx + x))
    return horiz + vert


def build_ising_2d(lx, ly, h=1.0, dt=0.1, steps=30, noise=None) -> NoisyCircuit:
    """Trotterized exp(iHt) for H = sum ZZ + h sum X on a periodic lattice, from |+...+>."""
    if lx < 2 or ly < 2:
        raise ConfigurationError(f"lattice sides must be >= 2, got {lx}x{ly}")
    n = lx * ly
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
    edges = lattice_edges(lx, ly)
    ops, points = [], [0]
    for _ in range(steps):
        ops += [_two_qubit("rzz", a, b, dt, noise) for a, b in edges]
        ops += [Op("rx", (j,), h * dt) for j in range(n)]
        points.append(len(ops))
    return NoisyCircuit(n, tuple(ops), "+", tuple(points), (("S_x", magnetization_x(n)),))


def build_xy_chain(n, tau=0.25, steps=25, noise=None) -> NoisyCircuit:
    """Periodic XY chain quench from |0001 0001 ...>; step = exp(-i tau YY) exp(-i tau XX)."""
    if n < 4 or n % 4:
        raise ConfigurationError(f"XY chain length must be a positive multiple of 4, got {n}")
    bonds = [(i, (i + 1) % n) for i in range(n)]
    ops, points = [], [0]
    for _ in range(steps):
        # XX and YY on the same bond commute, so each pair is exp(-i tau (XX + YY))
        # and conserves total Z
        for a, b in bonds:
            ops.append(_two_qubit("rxx", a, b, -tau, noise))
            ops.append(_two_qubit("ryy", a, b, -tau, noise))
        points.append(len(ops))
    initial = "0001" * (n // 4)
    observables = (
        ("S_z_pi", staggered_magnetization_z(n)),
        ("Pi", sector_projector(n // 2)),
    )
    return NoisyCircuit(n, tuple(ops), initial, tuple(points), observables)


def build_maxcut_floquet(graph: Graph, T=40, dt=0.25, noise=None, zz_sign=-1) -> NoisyCircuit:
    """Product over s = 1/T..1 of exp(i dt (1-s) sum X) exp(zz_sign i dt s sum ZZ), from |+...+>.

    The ZZ layer acts first within each step, as in the operator product. With
    ``zz_sign=-1`` the path runs from the ground state of -sum X to the ground
    state of sum ZZ (the maximum cut); ``+1`` ends in the ferromagnetic states.
    """
    if zz_sign not in (1, -1):
        raise ConfigurationError("zz_sign must be +1 or -1")
    n = graph.num_vertices
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
    ops = []
    for k in range(1, T + 1):
        s = k / T
        ops += [_two_qubit("rzz", a, b, zz_sign * dt * s, noise) for a, b in graph.edges]
        ops += [Op("rx", (j,), dt * (1.0 - s)) for j in range(n)]
    obs = (("cut_energy", pauli_sum([(1.0, "ZZ", e) for e in graph.edges])),)
    return NoisyCircuit(n, tuple(ops), "+", (len(ops),), obs, record_distribution=True)


def build_tilted_ising(n, hx=0.9045, hz=0.8090, dt=0.3, steps=50, noise=None) -> NoisyCircuit:
    """Open-chain tilted-field Ising Trotter steps from |0...0>, recording half-cut entropy."""
    if n < 2:
        raise ConfigurationError("tilted Ising chain needs at least 2 sites")
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
    ops, points = [], [0]
    for _ in range(steps):
        ops += [_two_qubit("rzz", j, j + 1, dt, noise) for j in range(n - 1)]
        ops += [Op("rx", (j,), hx * dt) for j in range(n)]
        ops += [Op("rz", (j,), hz * dt) for j in range(n)]
        points.append(len(ops))
    return NoisyCircuit(n, tuple(ops), "0", tuple(points), (("entropy", half_cut_entropy(n)),))


def build_toy_model(q=0.01, n=50, record_every=False) -> NoisyCircuit:
    """One qubit, n Z gates each followed by an X flip with probability q, measuring Z."""
    from .channels import pauli_channel

    noise = pauli_channel({"I": 1.0 - q, "X": q}, (0,))
    ops = tuple(Op("z", (0,), 0.0, noise) for _ in range(n))
    points = tuple(range(n + 1)) if record_every else (n,)
    return NoisyCircuit(1, ops, "0", points, (("Z", pauli_sum([(1.0, "Z", (0,))])),))


def build_random_circuit(num_qubits: int, num_gates: int, seed: int, noise=None) -> NoisyCircuit:
    """Random rotations; ``noise`` goes after every two-qubit gate. Records after every op."""
    rng = np.random.default_rng(seed)
    ops = []
    one = ("rx", "ry", "rz", "h")
    two = ("rxx", "ryy", "rzz")
    for _ in range(num_gates):
        angle = float(rng.uniform(-math.pi, math.pi))
        if num_qubits > 1 and rng.random() < 0.5:
            a, b = (int(v) for v in rng.choice(num_qubits, 2, replace=False))
            ops.append(_two_qubit(str(rng.choice(two)), a, b, angle, noise))
        else:
            ops.append(Op(str(rng.choice(one)), (int(rng.integers(num_qubits)),), angle))
    terms = [(1.0, "Z", (j,)) for j in range(num_qubits)]
    if num_qubits > 1:
        terms.append((1.0, "XX", (0, 1)))
    obs = tuple((f"O{j}", pauli_sum([t])) for j, t in enumerate(terms))
    return NoisyCircuit(num_qubits, tuple(ops), "0", tuple(range(num_gates + 1)), obs)


def attach_single_qubit_noise(circuit: NoisyCircuit, channel: NoiseChannel) -> NoisyCircuit:
    """Copy of ``circuit`` with ``channel`` after every one-qubit gate."""
    ops = tuple(
        replace(op, noise=channel.on(op.qubits)) if len(op.qubits) == 1 else op
        for op in circuit.ops
    )
    return replace(circuit, ops=ops)
