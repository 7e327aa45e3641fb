import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from analogtraj.channels import depolarizing, pauli_channel
from analogtraj.density import factorized_ptm, pauli_channel_ptm
from analogtraj.errors import SingularChannelError
from analogtraj.factorization import (
    depolarizing_factor,
    depolarizing_gaussian_variance,
    factorize,
    pauli_fidelities,
    verify_factorization,
)
from analogtraj.pauli import PauliString, enumerate_strings


def probs_of(d):
    return {PauliString.from_label(k): v for k, v in d.items()}


def random_channel(m, rng, noise=0.3):
    strings = enumerate_strings(m)
    w = rng.dirichlet(np.ones(len(strings) - 1)) * noise * rng.random()
    p = {s: float(v) for s, v in zip(strings[1:], w)}
    p[strings[0]] = 1.0 - math.fsum(w)
    return p


def test_fidelity_examples():
    assert all(v == 1.0 for v in pauli_fidelities(probs_of({"I": 1.0})).values())
    q = 0.1
    lam = {s.label: v for s, v in pauli_fidelities(probs_of({"I": 1 - q, "X": q})).items()}
    assert lam["I"] == lam["X"] == 1.0
    assert lam["Y"] == pytest.approx(1 - 2 * q) and lam["Z"] == pytest.approx(1 - 2 * q)


def test_fidelities_are_ptm_diagonal():
    rng = np.random.default_rng(3)
    for m in (1, 2):
        p = random_channel(m, rng)
        ptm = pauli_channel_ptm(p)
        assert np.allclose(ptm, np.diag(np.diag(ptm)), atol=1e-14)
        lam = pauli_fidelities(p)
        assert np.allclose(np.diag(ptm), [lam[s] for s in enumerate_strings(m)], atol=1e-14)
    eps = 0.2
    lam = pauli_fidelities(depolarizing(1, eps))
    assert all(v == pytest.approx(1 - eps) for s, v in lam.items() if not s.is_identity)


def test_factorize_examples():
    fac = factorize(probs_of({"I": 1.0}))
    assert all(q == 0.0 for q in fac.factors.values())
    q = 0.07
    fac = factorize(probs_of({"I": 1 - q, "X": q}))
    assert fac.factors[PauliString.from_label("X")] == pytest.approx(q, rel=1e-14)
    assert all(v == 0.0 for s, v in fac.factors.items() if s.label != "X")
    assert fac.nonzero_factors() == [(PauliString.from_label("X"), fac.factors[PauliString.from_label("X")])]


def test_depolarizing_value():
    fac = factorize(depolarizing(1, 0.1))
    for q in fac.factors.values():
        assert q == pytest.approx(0.5 - 0.5 * math.sqrt(0.9), abs=1e-15)
        assert q == pytest.approx(0.0256584, abs=1e-7)
    assert depolarizing_factor(1, 0.1) == pytest.approx(0.0256583509747431, abs=1e-15)
    assert depolarizing_gaussian_variance(2, 0.001) == pytest.approx(-math.log(0.999) / 16, rel=1e-15)


def test_singular_channel():
    with pytest.raises(SingularChannelError):
        factorize(probs_of({"I": 0.5, "X": 0.5}))
    with pytest.raises(SingularChannelError):
        factorize(depolarizing(1, 1.0))


def test_non_physical_flagged():
    # X and Y errors without Z: lambda_Z is smaller than lambda_X lambda_Y allows
    fac = factorize(probs_of({"I": 0.6, "X": 0.2, "Y": 0.2}))
    assert not fac.all_physical
    assert [s.label for s, _ in fac.negative_factors()] == ["Z"]
    assert verify_factorization(probs_of({"I": 0.6, "X": 0.2, "Y": 0.2}), fac) < 1e-12


def test_verify_sensitivity():
    p = depolarizing(2, 0.01)
    fac = factorize(p)
    assert verify_factorization(p, fac) < 1e-12
    bumped = dict(fac.factors)
    s = next(iter(bumped))
    bumped[s] += 1e-3
    assert verify_factorization(p, bumped) > 1e-4
    assert verify_factorization(probs_of({"I": 1.0}), {}) == 0.0


@given(st.integers(0, 10_000), st.sampled_from([1, 2]))
def test_roundtrip_ptm(seed, m):
    rng = np.random.default_rng(seed)
    p = random_channel(m, rng)
    assume(min(pauli_fidelities(p).values()) > 0)
    fac = factorize(p)
    assert verify_factorization(p, fac) < 1e-12
    assert np.allclose(factorized_ptm(fac.factors, m), pauli_channel_ptm(p), atol=1e-12, rtol=0)


def test_channel_input_accepted():
    a = factorize(depolarizing(2, 0.01))
    b = factorize(pauli_channel({s.label: v for s, v in a.source.items()}))
    assert a.factors == pytest.approx(b.factors)
