"""Exact factorization of a Pauli channel into commuting single-string channels.

A Pauli channel with probabilities p_S is diagonal in the Pauli basis, with
fidelities ``lambda_S = 1 - 2 sum_{S' in a(S)} p_S'``. Composing single-string
channels ``rho -> (1 - q_T) rho + q_T T rho T`` multiplies those fidelities by
``(1 - 2 q_T)`` for every T anticommuting with S, which inverts to

    q_S = 1/2 - 1/2 * (prod_{a(S)} lambda / prod_{c(S)} lambda) ** (2 / 4^M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channels import NoiseChannel, expand_to_pauli
from .errors import DimensionError, SingularChannelError
from .pauli import PauliString, anticommutation_table, enumerate_strings, string_index


def _as_vector(p) -> tuple[int, np.ndarray]:
    if isinstance(p, NoiseChannel):
        p = expand_to_pauli(p)
    sizes = {s.num_qubits for s in p}
    if len(sizes) != 1:
        raise DimensionError(f"mixed string sizes {sorted(sizes)}")
    m = sizes.pop()
    vec = np.zeros(4**m)
    for s, v in p.items():
        vec[string_index(s)] += v
    return m, vec


def pauli_fidelities(p) -> dict[PauliString, float]:
    """lambda_S for every string S, from a probability map (or Pauli channel)."""
    m, vec = _as_vector(p)
    lam = 1.0 - 2.0 * (anticommutation_table(m) @ vec)
    return dict(zip(enumerate_strings(m), lam.tolist()))


@dataclass(frozen=True)
class FactorizedChannel:
    factors: dict[PauliString, float]
    source: dict[PauliString, float]
    all_physical: bool

    @property
    def num_qubits(self) -> int:
        return next(iter(self.source)).num_qubits

    def nonzero_factors(self) -> list[tuple[PauliString, float]]:
        """Factors with q_S != 0 in enumeration order."""
        return [(s, q) for s, q in sorted(self.factors.items()) if q != 0.0]

    def negative_factors(self) -> list[tuple[PauliString, float]]:
        return [(s, q) for s, q in sorted(self.factors.items()) if not 0.0 <= q < 0.5]


def factorize(p) -> FactorizedChannel:
    """q_S for every non-identity string.

    Products run in log space. Raises :class:`SingularChannelError` when any
    fidelity is non-positive.
    """
    m, vec = _as_vector(p)
    table = anticommutation_table(m)
    lam = 1.0 - 2.0 * (table @ vec)
    strings = enumerate_strings(m)
    bad = np.flatnonzero(lam <= 0.0)
    if bad.size:
        worst = strings[int(bad[0])]
        raise SingularChannelError(
            f"Pauli fidelity of {worst} is {lam[bad[0]]:.6g} <= 0; "
            "channel is too noisy to factorize"
        )
    log_lam = np.log(lam)
    total = log_lam.sum()
    anti = table.astype(float) @ log_lam
    # commuting part = total - anticommuting part
    exponent = (2.0 / 4**m) * (anti - (total - anti))
    q = -0.5 * np.expm1(exponent)
    source = {s: float(v) for s, v in zip(strings, vec) if v != 0.0}
    factors = {}
    for s, qs in zip(strings[1:], q[1:]):
        # exact zeros when every fidelity the factor depends on is 1
        factors[s] = 0.0 if abs(qs) < 1e-17 else float(qs)
    physical = all(0.0 <= v < 0.5 for v in factors.values())
    return FactorizedChannel(factors=factors, source=source, all_physical=physical)


def verify_factorization(p, factors: Mapping) -> float:
    """max_S | lambda_S - prod_{T in a(S)} (1 - 2 q_T) |; absent factors count as 0."""
    m, vec = _as_vector(p)
    table = anticommutation_table(m)
    lam = 1.0 - 2.0 * (table @ vec)
    if isinstance(factors, FactorizedChannel):
        factors = factors.factors
    qv = np.zeros(4**m)
    for s, v in factors.items():
        if s.num_qubits != m:
            raise DimensionError("factor and channel sizes differ")
        qv[string_index(s)] = v
    one_minus = 1.0 - 2.0 * qv
    residual = 0.0
    for i in range(4**m):
        prod = math.prod(one_minus[table[i]])
        residual = max(residual, abs(lam[i] - prod))
    return residual


def depolarizing_factor(num_qubits: int, epsilon: float) -> float:
    """Closed form q_S = 1/2 - 1/2 (1 - epsilon)^(2 / 4^M), same for every S != I."""
    return -0.5 * math.expm1((2.0 / 4**num_qubits) * math.log1p(-epsilon))


def depolarizing_gaussian_variance(num_qubits: int, epsilon: float) -> float:
    """Gaussian angle variance -log(1 - epsilon) / 4^M for each depolarizing factor."""
    return -math.log1p(-epsilon) / 4**num_qubits
