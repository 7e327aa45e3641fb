import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from analogtraj import angles
from analogtraj.channels import amplitude_damping, coherent, depolarizing, pauli_channel
from analogtraj.density import DensityMatrix, apply_channel_dm
from analogtraj.errors import ContractError, DomainError, NonPhysicalFactorizationError
from analogtraj.factorization import factorize
from analogtraj.pauli import PauliString
from analogtraj.samplers import (
    MatrixOp,
    NoiseEvent,
    PauliFlip,
    PauliRotation,
    SamplerSpec,
    amplitude_damping_draw,
    analog_factorized_draw,
    analog_random_rotation_draw,
    coherent_draw,
    coherent_parameters,
    digital_draw,
    identity_deviation_batch,
    max_identity_deviation,
)
from analogtraj.statevector import StateVector

P = PauliString.from_label


def random_rho(m, seed):
    u = unitary_group.rvs(1 << m, random_state=seed)
    w = np.random.default_rng(seed).dirichlet(np.ones(1 << m))
    return (u * w) @ u.conj().T


def empirical_channel(sampler, rho, n, seed):
    """Mean and standard error of W rho W^dagger over n draws, entrywise."""
    rng = np.random.default_rng(seed)
    u = rng.random((n, sampler.n_variates))
    w = sampler.operators(u)
    out = w @ rho @ np.conj(np.transpose(w, (0, 2, 1)))
    mean = out.mean(axis=0)
    se_re = out.real.std(axis=0, ddof=1) / math.sqrt(n)
    se_im = out.imag.std(axis=0, ddof=1) / math.sqrt(n)
    return mean, se_re, se_im


CASES = [
    ("digital", "gaussian", depolarizing(2, 0.05)),
    ("analog_factorized", "gaussian", depolarizing(2, 0.05)),
    ("analog_factorized", "discrete", depolarizing(2, 0.05)),
    ("analog_factorized", "uniform", pauli_channel({"II": 0.88, "XZ": 0.06, "YY": 0.04, "ZX": 0.02})),
    ("analog_random_rotation", "gaussian", depolarizing(2, 0.05)),
    ("analog_random_rotation", "semicircular", pauli_channel({"I": 0.6, "X": 0.2, "Y": 0.2})),
    ("digital", "gaussian", coherent(0.3, 0.1)),
    ("analog_factorized", "gaussian", coherent(0.3, 0.1)),
    ("analog_factorized", "gaussian", coherent(1.2, 0.4, "ZY")),
    ("analog_factorized", "gaussian", amplitude_damping(0.05)),
    ("analog_factorized", "gaussian", amplitude_damping(0.7)),
]


@pytest.mark.parametrize("method,kind,channel", CASES)
def test_channel_reproduction(method, kind, channel):
    spec = SamplerSpec(method, kind, damping_angle="discrete")
    sampler = spec.for_channel(channel)
    rho = random_rho(channel.num_qubits, 11)
    exact = apply_channel_dm(DensityMatrix(rho, channel.num_qubits), channel).entries
    mean, se_re, se_im = empirical_channel(sampler, rho, 100_000, 3)
    assert np.all(np.abs(mean.real - exact.real) <= 5 * se_re + 1e-10)
    assert np.all(np.abs(mean.imag - exact.imag) <= 5 * se_im + 1e-10)


def test_analog_damping_gaussian_law():
    sampler = SamplerSpec("analog", damping_angle="gaussian").for_channel(amplitude_damping(0.3))
    rho = random_rho(1, 2)
    exact = apply_channel_dm(DensityMatrix(rho, 1), amplitude_damping(0.3)).entries
    mean, se_re, se_im = empirical_channel(sampler, rho, 100_000, 4)
    assert np.all(np.abs(mean - exact) <= 5 * np.hypot(se_re, se_im) + 1e-12)


def test_digital_damping_reproduces_channel():
    g = 0.3
    sampler = SamplerSpec("digital").for_channel(amplitude_damping(g))
    psi = np.array([0.6, 0.8j])
    batch = np.repeat(psi[None], 100_000, axis=0)
    u = np.random.default_rng(0).random((100_000, 1))
    sampler.apply_batch(batch, (0,), 1, u)
    assert np.allclose(np.linalg.norm(batch, axis=1), 1.0)
    rho = np.einsum("bi,bj->ij", batch, batch.conj()) / batch.shape[0]
    exact = apply_channel_dm(DensityMatrix.from_state(psi), amplitude_damping(g)).entries
    # p(jump) = g * 0.64; binomial error on the populations
    assert abs(rho[0, 0] - exact[0, 0]) < 5 * math.sqrt(0.2 * 0.8 / 100_000)


def test_digital_draw_examples():
    rng = np.random.default_rng(0)
    assert all(not digital_draw(depolarizing(1, 0.0), rng).actions for _ in range(100))
    n = 100_000
    draws = [digital_draw(pauli_channel({"I": 0.9, "X": 0.1}), rng) for _ in range(n)]
    freq = sum(bool(d.actions) for d in draws) / n
    assert abs(freq - 0.1) < 3 * math.sqrt(0.1 * 0.9 / n)
    sampler = SamplerSpec("digital").for_channel(depolarizing(1, 0.2))
    idx = sampler.choose(rng.random(n))
    labels = [sampler.actions[i].string.label if sampler.actions[i] else "I" for i in idx]
    for lab in "XYZ":
        f = labels.count(lab) / n
        assert abs(f - 0.05) < 3 * math.sqrt(0.05 * 0.95 / n)


def test_analog_factorized_examples():
    rng = np.random.default_rng(1)
    assert analog_factorized_draw(factorize(depolarizing(2, 0.0)), "gaussian", rng).actions == ()
    ev = analog_factorized_draw(factorize(depolarizing(2, 0.001)), "gaussian", rng)
    assert len(ev.actions) == 15
    assert all(isinstance(a, PauliRotation) for a in ev.actions)
    # factor order follows string enumeration
    assert [a.string for a in ev.actions] == sorted(a.string for a in ev.actions)
    sampler = SamplerSpec("analog").for_channel(depolarizing(2, 0.001))
    thetas = sampler.angles(rng.random((200_000, 15)))
    var = thetas.var(axis=0)
    target = -math.log(0.999) / 16
    se = target * math.sqrt(2 / 200_000)
    assert np.all(np.abs(var - target) < 5 * se)
    q = 0.03
    single = SamplerSpec("analog").for_channel(pauli_channel({"I": 1 - q, "X": q}))
    c2 = np.cos(2 * single.angles(rng.random((200_000, 1))))
    assert abs(c2.mean() - (1 - 2 * q)) < 5 * c2.std() / math.sqrt(200_000)


def test_non_physical_rejected_and_rotation_fallback():
    ch = pauli_channel({"I": 0.6, "X": 0.2, "Y": 0.2})
    with pytest.raises(NonPhysicalFactorizationError, match="q_Z="):
        SamplerSpec("analog").for_channel(ch)
    assert SamplerSpec("analog_random_rotation").for_channel(ch).q == pytest.approx(0.4)


def test_random_rotation_examples():
    rng = np.random.default_rng(2)
    ev = analog_random_rotation_draw({P("I"): 1.0}, "gaussian", rng)
    assert ev.actions == ()
    q = 0.05
    ev = analog_random_rotation_draw({P("I"): 1 - q, P("X"): q}, "gaussian", rng)
    assert ev.actions[0].string == P("X")
    s = SamplerSpec("analog_random_rotation").for_channel(depolarizing(1, 0.01))
    assert s.q == pytest.approx(0.0075)
    assert s.cumulative == pytest.approx([1 / 3, 2 / 3, 1.0])
    assert s.dist.scale == angles.solve_scale("gaussian", 0.0075)
    with pytest.raises(DomainError):
        analog_random_rotation_draw({P("I"): 0.4, P("X"): 0.6}, "gaussian", rng)


def test_coherent_parameters():
    assert coherent_parameters(0.3, 0.0) == (0.0, 0.0)
    assert coherent_parameters(0.0, 0.2) == (0.0, 0.0)
    alpha, q = 0.3, 0.1
    mu, sigma = coherent_parameters(alpha, q)
    assert mu == pytest.approx(0.5 * math.atan(q * math.sin(2 * alpha) / (1 - 2 * q * math.sin(alpha) ** 2)))
    assert sigma**2 == pytest.approx(-0.25 * math.log(1 - 4 * q * (1 - q) * math.sin(alpha) ** 2))
    # Gaussian moments: E[sin^2] = q sin^2 alpha and E[cos sin] = q cos alpha sin alpha
    e_sin2 = 0.5 - 0.5 * math.exp(-2 * sigma**2) * math.cos(2 * mu)
    e_cs = 0.5 * math.exp(-2 * sigma**2) * math.sin(2 * mu)
    assert e_sin2 == pytest.approx(q * math.sin(alpha) ** 2, rel=1e-13)
    assert e_cs == pytest.approx(q * math.cos(alpha) * math.sin(alpha), rel=1e-13)
    with pytest.raises(DomainError):
        coherent_parameters(math.pi / 2, 0.5)
    ev = coherent_draw(alpha, q, np.random.default_rng(0))
    assert ev.actions[0].string == P("X")


def test_amplitude_damping_examples():
    rng = np.random.default_rng(0)
    assert amplitude_damping_draw(0.0, "analog", rng).actions == ()
    g = 0.2
    one = np.array([0, 1], dtype=complex)
    zero = np.array([1, 0], dtype=complex)
    outs = []
    for _ in range(2):
        w = amplitude_damping_draw(g, "analog", rng).operator()
        assert np.allclose(w @ zero, zero)
        outs.append(w @ one)
    # the two signs of theta average to the exact damped state
    s = SamplerSpec("analog").for_channel(amplitude_damping(g))
    ws = s.operators(np.array([[0.1], [0.9]]))
    avg = sum(np.outer(w @ one, (w @ one).conj()) for w in ws) / 2
    assert np.allclose(avg, np.diag([g, 1 - g]))
    with pytest.raises(ContractError):
        amplitude_damping_draw(g, "digital", rng)
    ev = amplitude_damping_draw(1.0, "digital", rng, StateVector(one))
    assert np.allclose(ev.operator() @ one, zero)


def test_max_identity_deviation():
    assert max_identity_deviation(NoiseEvent(1)) == 0.0
    assert max_identity_deviation(NoiseEvent(1, (PauliFlip(P("X")),))) == 2.0
    for theta in (0.01, 0.3, -1.0, 2.5):
        ev = NoiseEvent(1, (PauliRotation(P("X"), theta),))
        assert max_identity_deviation(ev) == pytest.approx(2 * abs(math.sin(theta / 2)), abs=1e-15)
        assert float(identity_deviation_batch(ev.operator()[None])[0]) == pytest.approx(
            2 * abs(math.sin(theta / 2)), abs=1e-12
        )
    ev = NoiseEvent(2, (PauliRotation(P("XZ"), 0.1), MatrixOp(np.eye(4))))
    assert max_identity_deviation(ev) == pytest.approx(2 * math.sin(0.05), abs=1e-12)


def test_events_match_batch_operators():
    for method in ("digital", "analog", "analog_random_rotation"):
        s = SamplerSpec(method).for_channel(depolarizing(2, 0.3))
        u = np.random.default_rng(0).random((20, s.n_variates))
        ops = s.operators(u)
        for row, w in zip(u, ops):
            assert np.allclose(s.event(row).operator(), w, atol=1e-14)


def test_determinism_and_batch_invariance():
    s = SamplerSpec("analog").for_channel(depolarizing(2, 0.01))
    a = [s.draw(np.random.default_rng(9)).operator() for _ in range(3)]
    assert all(np.array_equal(a[0], x) for x in a)
    u = np.random.default_rng(1).random((33, s.n_variates))
    whole = s.operators(u)
    parts = np.concatenate([s.operators(u[:5]), s.operators(u[5:])])
    assert np.array_equal(whole, parts)


def test_spec_caches_per_channel():
    spec = SamplerSpec("analog")
    assert spec.for_channel(depolarizing(2, 0.01, (0, 1))) is spec.for_channel(depolarizing(2, 0.01, (3, 4)))
