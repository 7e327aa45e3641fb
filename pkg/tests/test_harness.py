import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from analogtraj.channels import depolarizing
from analogtraj.circuits import build_random_circuit, build_tilted_ising, build_toy_model
from analogtraj.density import evolve_circuit_dm
from analogtraj.errors import ContractError
from analogtraj.harness import (
    MIN_TRAJECTORIES,
    TrajectoryReport,
    entropy_ensemble,
    estimate,
    kl_topk,
    mean_distribution,
    ratio_of_variances,
    run_ensemble,
    run_trajectory,
    toy_model_stats,
    variance_ratio,
)
from analogtraj.samplers import SamplerSpec

DIGITAL = SamplerSpec("digital")
ANALOG = SamplerSpec("analog_factorized")
DISCRETE = SamplerSpec("analog_factorized", "discrete")


def small_circuit(eps=0.05):
    return build_random_circuit(2, 10, 3, depolarizing(2, eps))


def test_noiseless_trajectories_are_identical():
    c = build_random_circuit(3, 12, 1)
    vals = run_ensemble(c, ANALOG, 20, workers=1)
    assert np.allclose(vals, c.noiseless_series()[None], atol=1e-12)
    r = TrajectoryReport.from_values(vals, c)
    assert np.allclose(r.variance, 0.0, atol=1e-24)


def test_toy_trajectory_values():
    c = build_toy_model(0.2, 5)
    d = run_ensemble(c, DIGITAL, 200, workers=1)[:, -1, 0]
    assert set(np.round(d, 12)) <= {-1.0, 1.0}
    # discrete angles +-alpha with sin^2 alpha = q; the Z gates flip the sign of the
    # accumulated X rotation, so <Z> = cos(2 m alpha) for a random-walk position m
    a = run_ensemble(c, DISCRETE, 200, workers=1)[:, -1, 0]
    alpha = np.arcsin(np.sqrt(0.2))
    allowed = np.cos(2 * alpha * np.arange(-5, 6, 2))
    assert np.all(np.min(np.abs(a[:, None] - allowed[None]), axis=1) < 1e-12)


def test_estimate_stops_on_target():
    c = build_toy_model(0.01, 50)
    r = estimate(c, ANALOG, 0.01, 20000)
    assert r.stop_reason == "target_sem_met"
    assert r.trajectories_run >= MIN_TRAJECTORIES
    assert np.max(r.sem) <= 0.01
    assert abs(r.mean[0, 0] - (0.98**50)) < 4 * r.sem[0, 0]
    d = estimate(c, DIGITAL, 0.01, 20000)
    assert d.stop_reason == "target_sem_met"
    assert d.trajectories_run > 2 * r.trajectories_run


def test_estimate_floor_and_cap():
    c = build_random_circuit(2, 4, 0)
    assert estimate(c, ANALOG, 1.0).trajectories_run == MIN_TRAJECTORIES
    r = estimate(build_toy_model(0.01, 50), DIGITAL, 1e-6, 40)
    assert r.stop_reason == "max_trajectories"
    assert r.trajectories_run == 40
    with pytest.raises(ContractError):
        estimate(c, ANALOG, 0.0)


@pytest.mark.parametrize("spec", [DIGITAL, ANALOG, DISCRETE, SamplerSpec("analog_random_rotation")])
def test_ensemble_mean_matches_oracle(spec):
    c = small_circuit()
    exact = evolve_circuit_dm(c)
    r = TrajectoryReport.from_values(run_ensemble(c, spec, 4000, workers=1), c)
    z = np.abs(r.mean - exact) / np.maximum(r.sem, 1e-12)
    assert np.all((z < 5) | (np.abs(r.mean - exact) < 1e-10))


def test_batch_and_worker_invariance():
    c = small_circuit()
    base = run_ensemble(c, ANALOG, 40, master_seed=9, batch_size=40, workers=1)
    assert np.array_equal(base, run_ensemble(c, ANALOG, 40, master_seed=9, batch_size=7, workers=1))
    assert np.array_equal(base, run_ensemble(c, ANALOG, 40, master_seed=9, batch_size=5, workers=2))
    assert np.array_equal(base[13], run_trajectory(c, ANALOG, 13, master_seed=9))
    assert not np.array_equal(base, run_ensemble(c, ANALOG, 40, master_seed=10, workers=1))


def test_variance_ratio():
    c = build_random_circuit(2, 6, 2)
    ratio, _, _ = variance_ratio(c, 20)
    assert np.allclose(ratio, 1.0)
    ratio, rd, ra = variance_ratio(build_toy_model(0.01, 50), 20000)
    expected = toy_model_stats(0.01, 50, "digital")[1] / toy_model_stats(0.01, 50, "gaussian")[1]
    assert ratio[0, 0] == pytest.approx(expected, rel=0.2)
    assert ratio_of_variances(np.array([0.0, 1.0]), np.array([0.0, 2.0])).tolist() == [1.0, 0.5]


def test_toy_model_closed_forms():
    assert toy_model_stats(0.01, 50, "digital")[1] == pytest.approx(0.86738, abs=1e-5)
    assert toy_model_stats(0.01, 50, "discrete")[1] == pytest.approx(0.37546, abs=1e-5)
    assert toy_model_stats(0.01, 50, "gaussian")[1] == pytest.approx(0.37617, abs=1e-5)
    assert toy_model_stats(0.0, 50, "gaussian") == (1.0, 0.0)


def test_kl_conventions():
    p = np.random.default_rng(0).dirichlet(np.ones(64))
    assert kl_topk(p, p) == pytest.approx(0.0, abs=1e-14)
    q = p.copy()
    q[np.argmax(p)] = 0.0
    assert np.isfinite(kl_topk(p, q))
    assert kl_topk(p, q) > 0
    with pytest.raises(ContractError):
        kl_topk(p, p[:32])


@given(st.integers(1, 64), st.integers(0, 1000))
def test_kl_nonnegative(k, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(64)), rng.dirichlet(np.ones(64))
    assert kl_topk(p, q, k) >= 0


def test_mean_distribution_matches_oracle():
    c = build_random_circuit(3, 10, 4, depolarizing(2, 0.1))
    from analogtraj.density import final_dm

    exact = np.real(np.diag(final_dm(c).entries))
    approx = mean_distribution(c, ANALOG, 3000)
    assert approx.sum() == pytest.approx(1.0)
    assert np.max(np.abs(approx - exact)) < 0.02


def test_entropy_ensemble():
    c = build_tilted_ising(4, steps=3)
    mean, var = entropy_ensemble(c, ANALOG, 8)
    assert np.allclose(var, 0.0, atol=1e-20)
    assert np.allclose(mean, evolve_circuit_dm(c)[:, 0], atol=1e-9)
    with pytest.raises(ContractError):
        entropy_ensemble(build_toy_model(), ANALOG, 4)


def test_report_outputs(tmp_path):
    c = small_circuit()
    r = TrajectoryReport.from_values(run_ensemble(c, ANALOG, 5, workers=1), c, metadata={"seed": 0})
    r.write_json(tmp_path / "s.json")
    r.write_raw_csv(tmp_path / "raw.csv")
    r.write_summary_csv(tmp_path / "sum.csv")
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["trajectories_run"] == 5
    rows = list(csv.reader(open(tmp_path / "raw.csv")))
    assert rows[0] == ["trajectory_index", "record_point", "observable_name", "value"]
    assert len(rows) == 1 + 5 * len(c.record_points) * len(c.observables)
    first = float(rows[1][3])
    assert first == r.values[0, 0, 0]
    assert len(list(csv.reader(open(tmp_path / "sum.csv")))) == 1 + len(c.record_points) * len(c.observables)
    assert not list(tmp_path.glob("*.tmp-*"))
