"""Random operators W with E[W rho W^dagger] equal to a noise channel.

Every sampler consumes a fixed number of uniform variates per application
(``n_variates``) and maps them to an operator deterministically. The batch
path (:meth:`Sampler.operators`) and the single-event path
(:meth:`Sampler.draw`) share that mapping, so a trajectory's noise depends only
on its own uniform stream.

Samplers:

* ``digital``: insert a whole Kraus operator with its probability.
* ``analog_factorized``: one small Pauli rotation per factor of the exact
  single-string factorization of a Pauli channel.
* ``analog_random_rotation``: pick one string with probability p_S / sum p_T,
  then rotate by an angle solved for q = sum_{T != I} p_T.
* coherent over-rotation: one Gaussian rotation about the axis with shifted mean.
* amplitude damping: analog ``K1 (I + i theta K2)`` with E[theta]=0,
  E[theta^2]=1; digital picks K1/K2 by their state-dependent probabilities and
  renormalizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import angles
from .channels import (
    AmplitudeDampingChannel,
    CoherentChannel,
    DepolarizingChannel,
    NoiseChannel,
    PauliChannel,
    expand_to_pauli,
    validate,
)
from .errors import ContractError, DomainError, NonPhysicalFactorizationError
from .factorization import FactorizedChannel, factorize
from .pauli import PauliString, enumerate_strings
from .statevector import StateVector, apply_matrix_batch

METHODS = ("digital", "analog_factorized", "analog_random_rotation")
_METHOD_ALIASES = {
    "analog": "analog_factorized",
    "analog-factorized": "analog_factorized",
    "analog-random-rotation": "analog_random_rotation",
}


def canonical_method(method: str) -> str:
    method = _METHOD_ALIASES.get(method, method)
    if method not in METHODS:
        raise ValueError(f"unknown sampler {method!r}; choose from {METHODS}")
    return method


# ---------------------------------------------------------------------------
# events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PauliFlip:
    string: PauliString

    def matrix(self) -> np.ndarray:
        return self.string.matrix()


@dataclass(frozen=True)
class PauliRotation:
    string: PauliString
    theta: float

    def matrix(self) -> np.ndarray:
        d = 1 << self.string.num_qubits
        return math.cos(self.theta) * np.eye(d) + 1j * math.sin(self.theta) * self.string.matrix()


@dataclass(frozen=True, eq=False)
class MatrixOp:
    op: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.asarray(self.op, dtype=complex)


@dataclass(frozen=True)
class NoiseEvent:
    """Primitive actions applied in order on a ``num_qubits``-qubit support."""

    num_qubits: int
    actions: tuple = ()

    def operator(self) -> np.ndarray:
        w = np.eye(1 << self.num_qubits, dtype=complex)
        for action in self.actions:
            w = action.matrix() @ w
        return w

    def apply(self, state: StateVector, qubits) -> StateVector:
        from .statevector import apply_gate, apply_pauli_rotation

        for action in self.actions:
            if isinstance(action, PauliRotation):
                apply_pauli_rotation(state, action.string, qubits, action.theta)
            else:
                apply_gate(state, action.matrix(), qubits)
        return state


def max_identity_deviation(event: NoiseEvent) -> float:
    """Operator-norm distance ||W - I|| of the event's composed operator."""
    if not event.actions:
        return 0.0
    if len(event.actions) == 1:
        action = event.actions[0]
        # Pauli spectra are known exactly: {+1, -1} and {e^{+i theta}, e^{-i theta}}
        if isinstance(action, PauliFlip):
            return 0.0 if action.string.is_identity else 2.0
        if isinstance(action, PauliRotation) and not action.string.is_identity:
            return 2.0 * abs(math.sin(action.theta / 2.0))
    w = event.operator()
    return float(np.linalg.norm(w - np.eye(w.shape[0]), 2))


def identity_deviation_batch(mats: np.ndarray) -> np.ndarray:
    """||W_b - I|| for a stack of operators."""
    eye = np.eye(mats.shape[-1])
    return np.linalg.norm(mats - eye, ord=2, axis=(1, 2))


def _rotation_stack(pauli: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    d = pauli.shape[0]
    c = np.cos(thetas)[:, None, None]
    s = np.sin(thetas)[:, None, None]
    return c * np.eye(d) + 1j * s * pauli


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


class Sampler:
    num_qubits: int = 1
    n_variates: int = 0
    state_dependent: bool = False

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def operators(self, u: np.ndarray) -> np.ndarray:
        """Stack of operators, one per row of the ``(B, n_variates)`` uniforms."""
        raise NotImplementedError

    def event(self, u: np.ndarray) -> NoiseEvent:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator) -> NoiseEvent:
        return self.event(rng.random(self.n_variates))

    def apply_batch(self, psi, qubits, num_qubits, u) -> None:
        apply_matrix_batch(psi, self.operators(u), qubits, num_qubits)


class DigitalSampler(Sampler):
    """Categorical choice among unitary Kraus operators (identity first)."""

    n_variates = 1

    def __init__(self, weights, actions, num_qubits):
        self.num_qubits = num_qubits
        w = np.asarray(weights, dtype=float)
        self.cumulative = np.cumsum(w) / w.sum()
        self.cumulative[-1] = 1.0
        self.actions = list(actions)
        eye = np.eye(1 << num_qubits, dtype=complex)
        self.mats = np.stack([eye if a is None else a.matrix() for a in self.actions])

    def choose(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.cumulative, u, side="right")
        return np.minimum(idx, len(self.actions) - 1)

    def operators(self, u):
        return self.mats[self.choose(u[:, 0])]

    def event(self, u):
        action = self.actions[int(self.choose(u[0]))]
        return NoiseEvent(self.num_qubits, () if action is None else (action,))


def digital_pauli_sampler(probs: dict[PauliString, float]) -> DigitalSampler:
    m = next(iter(probs)).num_qubits
    ident = PauliString.identity(m)
    weights = [probs.get(ident, 0.0)]
    acts: list = [None]
    for s in enumerate_strings(m)[1:]:
        p = probs.get(s, 0.0)
        if p > 0.0:
            weights.append(p)
            acts.append(PauliFlip(s))
    return DigitalSampler(weights, acts, m)


class FactorizedSampler(Sampler):
    """One rotation exp(i theta_S S) per nonzero factor, in enumeration order."""

    def __init__(self, factors: FactorizedChannel, dist_kind: str = "gaussian"):
        if not factors.all_physical:
            bad = ", ".join(f"q_{s}={q:.6g}" for s, q in factors.negative_factors())
            raise NonPhysicalFactorizationError(
                f"factorization has non-physical factors ({bad}); "
                "use the analog_random_rotation sampler instead"
            )
        self.num_qubits = factors.num_qubits
        self.factors = factors.nonzero_factors()
        self.dists = [angles.make_distribution(dist_kind, q) for _, q in self.factors]
        self.paulis = [s.matrix() for s, _ in self.factors]
        self.n_variates = len(self.factors)

    def angles(self, u):
        return np.stack(
            [d.from_uniform(u[:, j]) for j, d in enumerate(self.dists)], axis=1
        ) if self.n_variates else np.zeros((u.shape[0], 0))

    def operators(self, u):
        thetas = self.angles(u)
        out = np.broadcast_to(np.eye(self.dim, dtype=complex), (u.shape[0], self.dim, self.dim))
        out = out.copy()
        for j, pauli in enumerate(self.paulis):
            out = _rotation_stack(pauli, thetas[:, j]) @ out
        return out

    def event(self, u):
        thetas = self.angles(np.asarray(u, dtype=float)[None, :])[0]
        return NoiseEvent(
            self.num_qubits,
            tuple(PauliRotation(s, float(t)) for (s, _), t in zip(self.factors, thetas)),
        )


class RandomRotationSampler(Sampler):
    def __init__(self, probs: dict[PauliString, float], dist_kind: str = "gaussian"):
        m = next(iter(probs)).num_qubits
        self.num_qubits = m
        self.strings = [s for s in enumerate_strings(m)[1:] if probs.get(s, 0.0) > 0.0]
        weights = np.array([probs[s] for s in self.strings])
        self.q = math.fsum(weights)
        if self.q >= 0.5:
            raise DomainError(
                f"total error probability {self.q} >= 1/2; a single rotation cannot represent it"
            )
        self.dist = angles.make_distribution(dist_kind, self.q) if self.strings else None
        self.n_variates = 2 if self.strings else 0
        if self.strings:
            self.cumulative = np.cumsum(weights) / weights.sum()
            self.cumulative[-1] = 1.0
            self.paulis = np.stack([s.matrix() for s in self.strings])

    def _pick(self, u):
        return np.minimum(np.searchsorted(self.cumulative, u, side="right"), len(self.strings) - 1)

    def operators(self, u):
        if not self.strings:
            return np.broadcast_to(np.eye(self.dim, dtype=complex), (u.shape[0], self.dim, self.dim))
        idx = self._pick(u[:, 0])
        thetas = self.dist.from_uniform(u[:, 1])
        c = np.cos(thetas)[:, None, None]
        s = np.sin(thetas)[:, None, None]
        return c * np.eye(self.dim) + 1j * s * self.paulis[idx]

    def event(self, u):
        if not self.strings:
            return NoiseEvent(self.num_qubits)
        s = self.strings[int(self._pick(u[0]))]
        theta = float(self.dist.from_uniform(u[1]))
        return NoiseEvent(self.num_qubits, (PauliRotation(s, theta),))


def coherent_parameters(alpha: float, q: float) -> tuple[float, float]:
    """(mu, sigma) of the Gaussian rotation angle reproducing the over-rotation channel."""
    s2 = math.sin(alpha) ** 2
    arg = 4.0 * q * (1.0 - q) * s2
    if not arg < 1.0:
        raise DomainError(f"4 q (1 - q) sin^2(alpha) = {arg} must be < 1")
    mu = 0.5 * math.atan2(q * math.sin(2.0 * alpha), 1.0 - 2.0 * q * s2)
    var = -0.25 * math.log1p(-arg)
    return mu, math.sqrt(var)


class CoherentSampler(Sampler):
    n_variates = 1

    def __init__(self, axis: PauliString, alpha: float, q: float):
        self.num_qubits = axis.num_qubits
        self.axis = axis
        self.mu, self.sigma = coherent_parameters(alpha, q)
        self.dist = angles.AngleDistribution("gaussian", self.sigma, self.mu)
        self.pauli = axis.matrix()

    def operators(self, u):
        return _rotation_stack(self.pauli, self.dist.from_uniform(u[:, 0]))

    def event(self, u):
        theta = float(self.dist.from_uniform(u[0]))
        return NoiseEvent(self.num_qubits, (PauliRotation(self.axis, theta),))


class AnalogDampingSampler(Sampler):
    """W = K1 exp(i theta K2) = K1 (I + i theta K2), which need not be unitary."""

    n_variates = 1
    num_qubits = 1

    def __init__(self, gamma: float, angle_law: str = "discrete"):
        if not 0.0 <= gamma <= 1.0:
            raise DomainError(f"gamma {gamma} outside [0, 1]")
        if angle_law not in ("discrete", "gaussian"):
            raise ValueError("amplitude damping angle law is 'discrete' or 'gaussian'")
        self.gamma = gamma
        self.k1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
        self.k2 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
        # unit second moment
        self.dist = angles.AngleDistribution(angle_law, 1.0)

    def _ops(self, thetas):
        eye = np.eye(2)
        inner = eye + 1j * thetas[:, None, None] * self.k2
        return self.k1 @ inner

    def operators(self, u):
        if self.gamma == 0.0:
            return np.broadcast_to(np.eye(2, dtype=complex), (u.shape[0], 2, 2))
        return self._ops(self.dist.from_uniform(u[:, 0]))

    def event(self, u):
        if self.gamma == 0.0:
            return NoiseEvent(1)
        theta = self.dist.from_uniform(np.asarray(u[:1]))
        return NoiseEvent(1, (MatrixOp(self._ops(theta)[0]),))


class DigitalDampingSampler(Sampler):
    """Jump to K2 with probability <psi|K2^dagger K2|psi>, then renormalize."""

    n_variates = 1
    num_qubits = 1
    state_dependent = True

    def __init__(self, gamma: float):
        if not 0.0 <= gamma <= 1.0:
            raise DomainError(f"gamma {gamma} outside [0, 1]")
        self.gamma = gamma
        self.k1 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
        self.k2 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)

    def jump_probability(self, psi, qubit, num_qubits):
        view = psi.reshape(psi.shape[0], 1 << qubit, 2, -1)
        excited = np.sum(np.abs(view[:, :, 1, :]) ** 2, axis=(1, 2))
        total = np.sum(np.abs(psi) ** 2, axis=1)
        return self.gamma * excited / total

    def apply_batch(self, psi, qubits, num_qubits, u):
        (qubit,) = qubits
        jump = u[:, 0] < self.jump_probability(psi, qubit, num_qubits)
        mats = np.where(jump[:, None, None], self.k2, self.k1)
        apply_matrix_batch(psi, mats, qubits, num_qubits)
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)

    def operators(self, u):
        raise ContractError("digital amplitude damping needs the current state")

    def event(self, u):
        raise ContractError("digital amplitude damping needs the current state")

    def draw(self, rng, state: StateVector | None = None, qubit: int = 0) -> NoiseEvent:
        if state is None:
            raise ContractError("digital amplitude damping needs the current state")
        u = rng.random(1)
        p2 = float(self.jump_probability(state.batch, qubit, state.num_qubits)[0])
        norm2 = float(np.vdot(state.amplitudes, state.amplitudes).real)
        if u[0] < p2:
            op = self.k2 / math.sqrt(p2 * norm2)
        else:
            op = self.k1 / math.sqrt((1.0 - p2) * norm2)
        return NoiseEvent(1, (MatrixOp(op),))


# ---------------------------------------------------------------------------
# spec -> sampler
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerSpec:
    method: str = "digital"
    angle_dist: str = "gaussian"
    damping_angle: str = "discrete"
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        object.__setattr__(self, "angle_dist", angles.canonical_kind(self.angle_dist))

    def for_channel(self, channel: NoiseChannel) -> Sampler:
        """Sampler for ``channel``; precomputation is cached per distinct channel."""
        key = channel.without_support()
        if key not in self._cache:
            self._cache[key] = _build(self.method, self.angle_dist, self.damping_angle, key)
        return self._cache[key]


@lru_cache(maxsize=256)
def _build(method, dist_kind, damping_angle, channel) -> Sampler:
    diag = validate(channel)
    if diag is not None:
        raise DomainError(f"invalid {channel.kind} channel: {diag}")
    if isinstance(channel, (PauliChannel, DepolarizingChannel)):
        probs = expand_to_pauli(channel)
        if method == "digital":
            return digital_pauli_sampler(probs)
        if method == "analog_factorized":
            return FactorizedSampler(factorize(probs), dist_kind)
        return RandomRotationSampler(probs, dist_kind)
    if isinstance(channel, CoherentChannel):
        if method == "digital":
            return DigitalSampler(
                [1.0 - channel.q, channel.q],
                [None, MatrixOp(channel.rotation())],
                channel.num_qubits,
            )
        return CoherentSampler(channel.axis, channel.alpha, channel.q)
    if isinstance(channel, AmplitudeDampingChannel):
        if method == "digital":
            return DigitalDampingSampler(channel.gamma)
        return AnalogDampingSampler(channel.gamma, damping_angle)
    raise TypeError(f"no sampler for {type(channel).__name__}")


# ---------------------------------------------------------------------------
# single-event entry points
# ---------------------------------------------------------------------------


def digital_draw(channel: NoiseChannel, rng: np.random.Generator) -> NoiseEvent:
    return digital_pauli_sampler(expand_to_pauli(channel)).draw(rng)


def analog_factorized_draw(
    factors: FactorizedChannel, dist_kind: str, rng: np.random.Generator
) -> NoiseEvent:
    return FactorizedSampler(factors, dist_kind).draw(rng)


def analog_random_rotation_draw(p, dist_kind: str, rng: np.random.Generator) -> NoiseEvent:
    if isinstance(p, NoiseChannel):
        p = expand_to_pauli(p)
    return RandomRotationSampler(p, dist_kind).draw(rng)


def coherent_draw(alpha: float, q: float, rng: np.random.Generator, axis="X") -> NoiseEvent:
    if isinstance(axis, str):
        axis = PauliString.from_label(axis)
    return CoherentSampler(axis, alpha, q).draw(rng)


def amplitude_damping_draw(
    gamma: float,
    method: str,
    rng: np.random.Generator,
    state: StateVector | None = None,
    qubit: int = 0,
    angle_law: str = "discrete",
) -> NoiseEvent:
    if canonical_method(method) == "digital":
        return DigitalDampingSampler(gamma).draw(rng, state, qubit)
    return AnalogDampingSampler(gamma, angle_law).draw(rng)
