"""Noise channel definitions and their Kraus realizations.

Every channel acts on a ``support`` of circuit qubits, in order. Local matrices
follow the Kronecker convention of :mod:`analogtraj.pauli` (support[0] is the
most significant factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, DomainError
from .pauli import PauliString, enumerate_strings

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NoiseChannel:
    support: tuple[int, ...] = ()

    kind = "abstract"

    @property
    def num_qubits(self) -> int:
        return len(self.support)

    def on(self, qubits) -> NoiseChannel:
        """Same channel placed on ``qubits``."""
        qubits = tuple(int(q) for q in qubits)
        if self.support and len(qubits) != len(self.support):
            raise DimensionError(f"{len(self.support)}-qubit channel placed on {qubits}")
        return replace(self, support=qubits)

    def without_support(self) -> NoiseChannel:
        """Support-free copy, usable as a cache key for per-channel precomputation."""
        return replace(self, support=())


@dataclass(frozen=True)
class PauliChannel(NoiseChannel):
    """N(rho) = sum_S p_S S rho S. Absent strings have probability zero."""

    entries: tuple[tuple[PauliString, float], ...] = ()
    size: int = 0

    kind = "pauli"

    @classmethod
    def from_probabilities(cls, probs: Mapping, support=None) -> PauliChannel:
        items = []
        for key, value in probs.items():
            s = PauliString.from_label(key) if isinstance(key, str) else key
            items.append((s, float(value)))
        if not items:
            raise ValueError("empty probability map")
        sizes = {s.num_qubits for s, _ in items}
        if len(sizes) != 1:
            raise DimensionError(f"mixed string sizes {sorted(sizes)}")
        size = sizes.pop()
        merged: dict[PauliString, float] = {}
        for s, v in items:
            merged[s] = merged.get(s, 0.0) + v
        entries = tuple(sorted(merged.items()))
        if support is None:
            support = tuple(range(size))
        support = tuple(int(q) for q in support)
        if len(support) != size:
            raise DimensionError(f"{size}-qubit channel placed on {support}")
        return cls(support=support, entries=entries, size=size)

    @property
    def num_qubits(self) -> int:
        return self.size

    @property
    def probabilities(self) -> dict[PauliString, float]:
        return dict(self.entries)


@dataclass(frozen=True)
class DepolarizingChannel(NoiseChannel):
    """p_S = epsilon / 4^M for S != I, p_I = 1 - epsilon (4^M - 1) / 4^M."""

    epsilon: float = 0.0
    size: int = 1

    kind = "depolarizing"

    @property
    def num_qubits(self) -> int:
        return self.size


@dataclass(frozen=True)
class CoherentChannel(NoiseChannel):
    """rho -> (1 - q) rho + q K rho K^dagger with K = exp(i alpha axis)."""

    axis: PauliString = field(default_factory=lambda: PauliString.from_label("X"))
    alpha: float = 0.0
    q: float = 0.0

    kind = "coherent"

    @property
    def num_qubits(self) -> int:
        return self.axis.num_qubits

    def rotation(self) -> np.ndarray:
        return math.cos(self.alpha) * np.eye(1 << self.num_qubits) + 1j * math.sin(
            self.alpha
        ) * self.axis.matrix()


@dataclass(frozen=True)
class AmplitudeDampingChannel(NoiseChannel):
    gamma: float = 0.0

    kind = "amplitude_damping"

    @property
    def num_qubits(self) -> int:
        return 1

    def kraus_pair(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.gamma
        k1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - g)]], dtype=complex)
        k2 = np.array([[0.0, math.sqrt(g)], [0.0, 0.0]], dtype=complex)
        return k1, k2


def depolarizing(num_qubits: int, epsilon: float, support=None) -> DepolarizingChannel:
    support = tuple(range(num_qubits)) if support is None else tuple(support)
    if len(support) != num_qubits:
        raise DimensionError(f"{num_qubits}-qubit channel placed on {support}")
    return DepolarizingChannel(support=support, epsilon=float(epsilon), size=num_qubits)


def pauli_channel(probs: Mapping, support=None) -> PauliChannel:
    return PauliChannel.from_probabilities(probs, support)


def coherent(alpha: float, q: float, axis="X", support=None) -> CoherentChannel:
    if isinstance(axis, str):
        axis = PauliString.from_label(axis)
    support = tuple(range(axis.num_qubits)) if support is None else tuple(support)
    if len(support) != axis.num_qubits:
        raise DimensionError(f"{axis.num_qubits}-qubit channel placed on {support}")
    return CoherentChannel(support=support, axis=axis, alpha=float(alpha), q=float(q))


def amplitude_damping(gamma: float, support=(0,)) -> AmplitudeDampingChannel:
    support = tuple(support)
    if len(support) != 1:
        raise DimensionError("amplitude damping acts on one qubit")
    return AmplitudeDampingChannel(support=support, gamma=float(gamma))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    constraint: str
    residual: float
    message: str

    def __str__(self) -> str:
        return self.message


def validate(channel: NoiseChannel) -> Diagnostic | None:
    """Return the first violated invariant, or None when the channel is valid."""
    if isinstance(channel, PauliChannel):
        for s, p in channel.entries:
            if not 0.0 <= p <= 1.0:
                return Diagnostic(
                    "probability_range",
                    min(abs(p), abs(p - 1.0)),
                    f"probability of {s} is {p}, outside [0, 1]",
                )
        dev = math.fsum(p for _, p in channel.entries) - 1.0
        if abs(dev) > SUM_TOLERANCE:
            return Diagnostic("normalization", abs(dev), f"sum deviates by {abs(dev):.3g}")
        return None
    if isinstance(channel, DepolarizingChannel):
        if not 0.0 <= channel.epsilon <= 1.0:
            return Diagnostic(
                "epsilon_range",
                max(-channel.epsilon, channel.epsilon - 1.0),
                f"epsilon {channel.epsilon} out of range",
            )
        return None
    if isinstance(channel, CoherentChannel):
        if not 0.0 <= channel.q <= 1.0:
            return Diagnostic(
                "q_range", max(-channel.q, channel.q - 1.0), f"q {channel.q} out of range"
            )
        if channel.axis.is_identity:
            return Diagnostic("axis", 0.0, "coherent axis must not be the identity")
        return None
    if isinstance(channel, AmplitudeDampingChannel):
        if not 0.0 <= channel.gamma <= 1.0:
            return Diagnostic(
                "gamma_range",
                max(-channel.gamma, channel.gamma - 1.0),
                "gamma out of range",
            )
        return None
    return Diagnostic("kind", 0.0, f"unknown channel type {type(channel).__name__}")


def _raise_if_invalid(channel: NoiseChannel) -> None:
    diag = validate(channel)
    if diag is not None:
        raise DomainError(f"invalid {channel.kind} channel: {diag}")


def expand_to_pauli(channel: NoiseChannel) -> dict[PauliString, float]:
    """Probability map over all strings with nonzero weight (identity always present)."""
    if isinstance(channel, PauliChannel):
        probs = channel.probabilities
        ident = PauliString.identity(channel.num_qubits)
        probs.setdefault(ident, 0.0)
        return {ident: probs.pop(ident), **probs}
    if isinstance(channel, DepolarizingChannel):
        m = channel.num_qubits
        strings = enumerate_strings(m)
        if channel.epsilon == 0.0:
            return {strings[0]: 1.0}
        each = channel.epsilon / 4**m
        out = {s: each for s in strings[1:]}
        # identity takes the exact complement so the map sums to one under fsum
        return {strings[0]: 1.0 - math.fsum(out.values()), **out}
    raise TypeError(f"{channel.kind} channel has no Pauli expansion")


def kraus_operators(channel: NoiseChannel) -> list[tuple[float, np.ndarray]]:
    """``(weight, matrix)`` pairs with sum_q w_q M_q^dagger M_q = Id."""
    _raise_if_invalid(channel)
    if isinstance(channel, (PauliChannel, DepolarizingChannel)):
        return [(p, s.matrix()) for s, p in expand_to_pauli(channel).items() if p > 0.0]
    if isinstance(channel, CoherentChannel):
        d = 1 << channel.num_qubits
        return [(1.0 - channel.q, np.eye(d, dtype=complex)), (channel.q, channel.rotation())]
    if isinstance(channel, AmplitudeDampingChannel):
        k1, k2 = channel.kraus_pair()
        return [(1.0, k1), (1.0, k2)]
    raise TypeError(f"unsupported channel {type(channel).__name__}")


def coherent_rotation_dense(axis: PauliString, alpha: float) -> np.ndarray:
    """exp(i alpha axis) by matrix exponential, independent of the cos/sin identity."""
    return expm(1j * alpha * axis.matrix())


# ---------------------------------------------------------------------------
# JSON channel specs
# ---------------------------------------------------------------------------


def channel_to_json(channel: NoiseChannel) -> dict:
    out: dict = {"type": channel.kind, "support": list(channel.support)}
    if isinstance(channel, PauliChannel):
        out["probabilities"] = {s.label: p for s, p in channel.entries}
    elif isinstance(channel, DepolarizingChannel):
        out["epsilon"] = channel.epsilon
        out["num_qubits"] = channel.num_qubits
    elif isinstance(channel, CoherentChannel):
        out.update(axis=channel.axis.label, alpha=channel.alpha, q=channel.q)
    elif isinstance(channel, AmplitudeDampingChannel):
        out["gamma"] = channel.gamma
    return out


def channel_from_json(data: Mapping) -> NoiseChannel:
    kind = data.get("type")
    support = data.get("support")
    try:
        if kind == "pauli":
            return pauli_channel(data["probabilities"], support)
        if kind in ("depolarizing", "depol"):
            m = int(data.get("num_qubits", len(support) if support else 1))
            return depolarizing(m, float(data["epsilon"]), support)
        if kind == "coherent":
            return coherent(float(data["alpha"]), float(data["q"]), data.get("axis", "X"), support)
        if kind == "amplitude_damping":
            return amplitude_damping(float(data["gamma"]), support or (0,))
    except KeyError as exc:
        raise ValueError(f"{kind} channel spec is missing field {exc.args[0]!r}") from None
    raise ValueError(f"unknown channel type {kind!r}")
