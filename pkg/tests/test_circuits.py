import json

import numpy as np
import pytest

from analogtraj.channels import depolarizing
from analogtraj.circuits import (
    Graph,
    NoisyCircuit,
    Op,
    build_ising_2d,
    build_maxcut_floquet,
    build_tilted_ising,
    build_toy_model,
    build_xy_chain,
    cycle_graph,
    gate_matrix,
    lattice_edges,
    load_circuit,
    random_3_regular_graph,
)
from analogtraj.density import evolve_circuit_dm
from analogtraj.errors import ConfigurationError, DimensionError
from analogtraj.statevector import probabilities

NOISE = depolarizing(2, 0.001)


def test_gate_conventions():
    theta = 0.3
    x = np.array([[0, 1], [1, 0]])
    assert np.allclose(gate_matrix("rx", theta), np.cos(theta) * np.eye(2) + 1j * np.sin(theta) * x)
    zz = np.diag([1, -1, -1, 1])
    assert np.allclose(gate_matrix("rzz", theta), np.diag(np.exp(1j * theta * np.diag(zz))))
    with pytest.raises(ConfigurationError):
        gate_matrix("cnot")


def test_op_checks():
    with pytest.raises(DimensionError):
        Op("rzz", (0,), 0.1)
    with pytest.raises(DimensionError):
        Op("rzz", (1, 1), 0.1)
    with pytest.raises(DimensionError):
        Op("rzz", (0, 1), 0.1, NOISE.on((1, 2)))
    assert Op("rzz", (2, 3), 0.1, depolarizing(2, 0.1).without_support()).noise.support == (2, 3)


def test_ising_structure():
    c = build_ising_2d(4, 4, 1.0, 0.1, 3, NOISE)
    assert c.num_qubits == 16
    assert c.noise_count() == 3 * 32
    assert all(op.noise.support == op.qubits for op in c.ops if op.noise is not None)
    assert all(op.gate == "rzz" for op in c.ops if op.noise is not None)
    assert c.record_points == (0, 48, 96, 144)
    assert lattice_edges(4, 4)[:4] == [(0, 1), (1, 2), (2, 3), (3, 0)]
    assert len(lattice_edges(2, 2)) == 4
    assert build_ising_2d(4, 5, 1.0, 0.1, 0).noiseless_series()[0, 0] == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        build_ising_2d(1, 4)


@pytest.mark.parametrize(
    "circuit",
    [
        build_ising_2d(2, 2, 1.0, 0.1, 4, NOISE),
        build_ising_2d(2, 3, 0.7, 0.2, 3, NOISE),
        build_xy_chain(4, 0.25, 3, NOISE),
        build_tilted_ising(6, steps=4, noise=NOISE),
        build_maxcut_floquet(cycle_graph(4), 5, 0.3, NOISE),
    ],
)
def test_noiseless_matches_oracle(circuit):
    assert np.allclose(circuit.noiseless_series(), evolve_circuit_dm(circuit.strip_noise()), atol=1e-9)


def test_xy_chain():
    c = build_xy_chain(8, 0.25, 6, NOISE)
    series = c.noiseless_series()
    assert series[0, 0] == pytest.approx(0.5)
    assert series[0, 1] == pytest.approx(1.0)
    assert np.allclose(series[:, 1], 1.0, atol=1e-10)
    assert c.noise_count() == 6 * 16
    with pytest.raises(ConfigurationError):
        build_xy_chain(6)


def test_tilted_ising_entropy_starts_at_zero():
    c = build_tilted_ising(6, steps=3, noise=NOISE)
    assert c.noiseless_series()[0, 0] == pytest.approx(0.0, abs=1e-14)
    assert c.noise_count() == 3 * 5
    assert c.initial == "000000"


def test_maxcut():
    g = cycle_graph(4)
    c = build_maxcut_floquet(g, 200, 0.25)
    p = probabilities(_final_state(c))
    top2 = sorted(np.argsort(p)[-2:])
    assert [format(i, "04b") for i in top2] == ["0101", "1010"]
    flat = probabilities(_final_state(build_maxcut_floquet(g, 10, 0.0)))
    assert np.allclose(flat, 1 / 16)
    c = build_maxcut_floquet(random_3_regular_graph(8, 1), 4, 0.25, NOISE)
    assert c.noise_count() == 4 * 12
    assert c.record_distribution


def _final_state(circuit):
    from analogtraj.statevector import apply_gate

    s = circuit.initial_state()
    for op in circuit.ops:
        apply_gate(s, op.matrix(), op.qubits)
    return s


def test_random_regular_graphs():
    assert random_3_regular_graph(4, 0).edges == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    g = random_3_regular_graph(20, 7)
    assert all(d == 3 for d in g.degrees())
    assert g == random_3_regular_graph(20, 7)
    assert g != random_3_regular_graph(20, 8)
    with pytest.raises(ConfigurationError):
        random_3_regular_graph(7, 0)
    with pytest.raises(ConfigurationError):
        Graph(3, ((0, 0),))


def test_builders_are_pure():
    assert build_ising_2d(3, 3, 1.0, 0.1, 2, NOISE) == build_ising_2d(3, 3, 1.0, 0.1, 2, NOISE)


def test_json_roundtrip(tmp_path):
    for c in (build_xy_chain(4, 0.2, 2, NOISE), build_toy_model(0.02, 5), build_ising_2d(2, 2, 1, 0.1, 1, NOISE)):
        back = NoisyCircuit.from_json(json.loads(c.dumps()))
        assert back == c
    path = tmp_path / "c.json"
    path.write_text(build_toy_model(0.02, 3).dumps())
    assert load_circuit(path) == build_toy_model(0.02, 3)
    path.write_text('{"num_qubits": 1,\n "ops": [}')
    with pytest.raises(ConfigurationError, match="line 2"):
        load_circuit(path)
    with pytest.raises(ConfigurationError):
        NoisyCircuit.from_json({"ops": []})


def test_circuit_validation():
    with pytest.raises(ConfigurationError):
        NoisyCircuit(2, (), "012")
    with pytest.raises(DimensionError):
        NoisyCircuit(2, (Op("rx", (3,), 0.1),))
    with pytest.raises(ConfigurationError):
        NoisyCircuit(1, (Op("x", (0,)),), "0", (1, 0))
