"""Trajectory ensembles, estimators and the benchmark statistics.

Trajectory ``i`` of stream ``s`` under master seed ``m`` draws all of its
uniform variates from ``default_rng([m, s, i])``; each noisy op owns a fixed
slice of them. A trajectory's result is therefore a pure function of
``(circuit, sampler spec, m, s, i)``, whatever the batch size or worker count.

State-independent noise is fused into the preceding gate: the harness applies
``W_b @ G`` as one per-trajectory matrix.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import angles
from .circuits import NoisyCircuit
from .errors import ContractError
from .samplers import SamplerSpec
from .statevector import expectation_batch, top_k_indices

log = logging.getLogger(__name__)

MIN_TRAJECTORIES = 16
KL_FLOOR = 1e-12
KL_CONVENTION = "restrict to exact top-k, floor single at 1e-12, renormalize both, |KL|"
_AMPLITUDE_BUDGET = 1 << 22


def trajectory_rng(master_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(master_seed), int(stream), int(index)])


def default_workers() -> int:
    env = os.environ.get("ANALOGTRAJ_WORKERS")
    if env:
        return max(1, int(env))
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


def default_batch_size(num_qubits: int) -> int:
    return max(1, min(1024, _AMPLITUDE_BUDGET >> num_qubits))


class CompiledCircuit:
    """A circuit with every attached channel resolved to a sampler once."""

    def __init__(self, circuit: NoisyCircuit, spec: SamplerSpec | None):
        self.circuit = circuit
        self.spec = spec
        self.num_qubits = circuit.num_qubits
        self.steps = []
        offset = 0
        for op in circuit.ops:
            sampler = None
            if op.noise is not None and spec is not None:
                sampler = spec.for_channel(op.noise)
                if sampler.n_variates == 0 and not sampler.state_dependent:
                    sampler = None
            gate = np.ascontiguousarray(op.matrix(), dtype=np.complex128)
            self.steps.append((gate, op.qubits, sampler, offset))
            if sampler is not None:
                offset += sampler.n_variates
        self.n_variates = offset
        self.observables = [obs for _, obs in circuit.observables]

    def uniforms(self, indices, master_seed, stream) -> np.ndarray:
        u = np.empty((len(indices), self.n_variates))
        for r, i in enumerate(indices):
            u[r] = trajectory_rng(master_seed, i, stream).random(self.n_variates)
        return u

    def _apply(self, psi, step, u):
        from .statevector import apply_matrix_batch

        gate, qubits, sampler, off = step
        n = self.num_qubits
        if sampler is None:
            apply_matrix_batch(psi, gate[None], qubits, n)
            return
        block = u[:, off : off + sampler.n_variates]
        if sampler.state_dependent:
            apply_matrix_batch(psi, gate[None], qubits, n)
            sampler.apply_batch(psi, qubits, n, block)
        else:
            apply_matrix_batch(psi, sampler.operators(block) @ gate, qubits, n)

    def run_batch(self, indices, master_seed: int, stream: int = 0, final_state: bool = False):
        """Observable values ``(B, record points, observables)`` and optionally final states."""
        b = len(indices)
        u = self.uniforms(indices, master_seed, stream)
        psi0 = self.circuit.initial_state().amplitudes
        psi = np.repeat(psi0[None, :], b, axis=0)
        pts = self.circuit.record_points
        out = np.empty((b, len(pts), len(self.observables)))
        done = 0
        for r, point in enumerate(pts):
            for step in self.steps[done:point]:
                self._apply(psi, step, u)
            done = point
            for k, obs in enumerate(self.observables):
                out[:, r, k] = expectation_batch(psi, obs, self.num_qubits)
        for step in self.steps[done:]:
            self._apply(psi, step, u)
        return (out, psi) if final_state else out


_COMPILED: dict = {}


def compile_circuit(circuit: NoisyCircuit, spec: SamplerSpec | None) -> CompiledCircuit:
    key = (id(circuit), spec)
    hit = _COMPILED.get(key)
    if hit is None or hit.circuit is not circuit:
        if len(_COMPILED) > 32:
            _COMPILED.clear()
        hit = _COMPILED[key] = CompiledCircuit(circuit, spec)
    return hit


def _chunks(indices, size):
    for a in range(0, len(indices), size):
        yield indices[a : a + size]


def _worker(args):
    circuit, spec, chunk, seed, stream = args
    return compile_circuit(circuit, spec).run_batch(chunk, seed, stream)


def run_ensemble(
    circuit: NoisyCircuit,
    spec: SamplerSpec | None,
    indices: Sequence[int] | int,
    master_seed: int = 0,
    stream: int = 0,
    batch_size: int | None = None,
    workers: int | None = None,
) -> np.ndarray:
    """Observable values for the given trajectory indices, ``(n, record points, observables)``."""
    if isinstance(indices, (int, np.integer)):
        indices = range(int(indices))
    indices = list(indices)
    batch_size = batch_size or default_batch_size(circuit.num_qubits)
    workers = default_workers() if workers is None else workers
    chunks = list(_chunks(indices, batch_size))
    if not chunks:
        return np.zeros((0, len(circuit.record_points), len(circuit.observables)))
    if workers <= 1 or len(chunks) == 1:
        compiled = compile_circuit(circuit, spec)
        parts = [compiled.run_batch(c, master_seed, stream) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_worker, [(circuit, spec, c, master_seed, stream) for c in chunks]))
    return np.concatenate(parts, axis=0)


def run_trajectory(
    circuit: NoisyCircuit,
    spec: SamplerSpec | None,
    trajectory_index: int,
    master_seed: int = 0,
    stream: int = 0,
) -> np.ndarray:
    """Observable series ``(record points, observables)`` of one trajectory."""
    return compile_circuit(circuit, spec).run_batch([trajectory_index], master_seed, stream)[0]


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def _fsum_mean(values: np.ndarray) -> np.ndarray:
    """Compensated column means over axis 0, in index order."""
    flat = values.reshape(values.shape[0], -1)
    out = np.array([math.fsum(flat[:, j]) for j in range(flat.shape[1])]) / flat.shape[0]
    return out.reshape(values.shape[1:])


def _sample_variance(values: np.ndarray, mean: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    if n < 2:
        return np.zeros(values.shape[1:])
    return _fsum_mean((values - mean) ** 2) * n / (n - 1)


@dataclass
class TrajectoryReport:
    values: np.ndarray
    record_points: tuple[int, ...]
    observable_names: list[str]
    mean: np.ndarray
    variance: np.ndarray
    sem: np.ndarray
    trajectories_run: int
    stop_reason: str
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_values(cls, values, circuit: NoisyCircuit, stop_reason="fixed", metadata=None):
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        mean = _fsum_mean(values)
        var = _sample_variance(values, mean)
        sem = np.sqrt(var / n)
        return cls(
            values,
            tuple(circuit.record_points),
            circuit.observable_names,
            mean,
            var,
            sem,
            n,
            stop_reason,
            dict(metadata or {}),
        )

    def summary(self) -> dict:
        return {
            "trajectories_run": self.trajectories_run,
            "stop_reason": self.stop_reason,
            "record_points": list(self.record_points),
            "observables": {
                name: {
                    "mean": self.mean[:, k].tolist(),
                    "variance": self.variance[:, k].tolist(),
                    "sem": self.sem[:, k].tolist(),
                }
                for k, name in enumerate(self.observable_names)
            },
            "metadata": self.metadata,
        }

    def to_json(self, include_values: bool = False) -> dict:
        out = self.summary()
        if include_values:
            out["values"] = self.values.tolist()
        return out

    def write_json(self, path, include_values: bool = False) -> None:
        write_atomic(path, json.dumps(self.to_json(include_values), indent=1))

    def raw_rows(self):
        for i in range(self.values.shape[0]):
            for r, point in enumerate(self.record_points):
                for k, name in enumerate(self.observable_names):
                    yield (i, point, name, repr(float(self.values[i, r, k])))

    def summary_rows(self):
        for r, point in enumerate(self.record_points):
            for k, name in enumerate(self.observable_names):
                yield (
                    point,
                    name,
                    repr(float(self.mean[r, k])),
                    repr(float(self.variance[r, k])),
                    repr(float(self.sem[r, k])),
                    self.trajectories_run,
                )

    def write_raw_csv(self, path) -> None:
        write_csv(path, ("trajectory_index", "record_point", "observable_name", "value"), self.raw_rows())

    def write_summary_csv(self, path) -> None:
        write_csv(
            path,
            ("record_point", "observable_name", "mean", "variance", "sem", "n"),
            self.summary_rows(),
        )


def write_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, header, rows) -> None:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    write_atomic(path, buf.getvalue())


def _first_stop(values: np.ndarray, target_sem: float, start: int) -> int | None:
    """Smallest n >= max(start, MIN_TRAJECTORIES) with max SEM over the first n <= target."""
    n_all = values.shape[0]
    flat = values.reshape(n_all, -1)
    shifted = flat - flat[0]
    c1 = np.cumsum(shifted, axis=0)
    c2 = np.cumsum(shifted**2, axis=0)
    lo = max(start, MIN_TRAJECTORIES)
    for n in range(lo, n_all + 1):
        s1, s2 = c1[n - 1], c2[n - 1]
        var = np.maximum(s2 - s1 * s1 / n, 0.0) / (n - 1)
        if np.max(np.sqrt(var / n)) <= target_sem:
            return n
    return None


def estimate(
    circuit: NoisyCircuit,
    spec: SamplerSpec | None,
    target_sem: float,
    max_trajectories: int = 100_000,
    master_seed: int = 0,
    stream: int = 0,
    batch_size: int | None = None,
) -> TrajectoryReport:
    """Add trajectories in index order until the max SEM over record points meets the target."""
    if not target_sem > 0:
        raise ContractError("target_sem must be positive")
    batch_size = batch_size or default_batch_size(circuit.num_qubits)
    parts: list[np.ndarray] = []
    have = 0
    stop, reason = None, "max_trajectories"
    while have < max_trajectories:
        take = min(batch_size, max_trajectories - have)
        parts.append(run_ensemble(circuit, spec, range(have, have + take), master_seed, stream, batch_size))
        have += take
        values = np.concatenate(parts, axis=0)
        stop = _first_stop(values, target_sem, have - take + 1)
        if stop is not None:
            reason = "target_sem_met"
            break
    values = np.concatenate(parts, axis=0)
    if stop is not None:
        values = values[:stop]
    meta = {"target_sem": target_sem, "max_trajectories": max_trajectories, "master_seed": master_seed}
    return TrajectoryReport.from_values(values, circuit, reason, meta)


def variance_ratio(
    circuit: NoisyCircuit,
    n_trajectories: int,
    master_seed: int = 0,
    digital: SamplerSpec | None = None,
    analog: SamplerSpec | None = None,
    batch_size: int | None = None,
) -> tuple[np.ndarray, TrajectoryReport, TrajectoryReport]:
    """Var(digital) / Var(analog) per record point and observable; 0/0 reads as 1.

    The two ensembles use disjoint seed streams (1 and 2).
    """
    if n_trajectories < 2:
        raise ContractError("variance_ratio needs at least 2 trajectories per method")
    digital = digital or SamplerSpec("digital")
    analog = analog or SamplerSpec("analog_factorized")
    vd = run_ensemble(circuit, digital, n_trajectories, master_seed, 1, batch_size)
    va = run_ensemble(circuit, analog, n_trajectories, master_seed, 2, batch_size)
    rd = TrajectoryReport.from_values(vd, circuit, metadata={"sampler": "digital"})
    ra = TrajectoryReport.from_values(va, circuit, metadata={"sampler": analog.method})
    return ratio_of_variances(rd.variance, ra.variance), rd, ra


def ratio_of_variances(num: np.ndarray, den: np.ndarray, atol: float = 1e-24) -> np.ndarray:
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    both_zero = (np.abs(num) <= atol) & (np.abs(den) <= atol)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(both_zero, 1.0, num / den)
    return out


def toy_model_stats(q: float, n: int, dist_kind: str) -> tuple[float, float]:
    """(mean, variance) of <Z> over toy-model trajectories.

    ``dist_kind`` is an angle distribution kind or ``"digital"``. The analog
    variance uses E[sin^4 theta] from quadrature of the solved distribution.
    """
    mean = (1.0 - 2.0 * q) ** n
    if q == 0.0:
        return 1.0, 0.0
    if dist_kind == "digital":
        return mean, 1.0 - mean * mean
    dist = angles.make_distribution(dist_kind, q)
    _, sin4 = angles.second_moment_check(dist)
    var = 0.5 + 0.5 * (1.0 - 8.0 * q + 8.0 * sin4) ** n - (1.0 - 2.0 * q) ** (2 * n)
    return mean, var


# ---------------------------------------------------------------------------
# distributions and entropy
# ---------------------------------------------------------------------------


def kl_topk(p_exact, p_single, k: int = 50) -> float:
    """|KL| restricted to the k most likely states of ``p_exact``, both renormalized there."""
    p_exact = np.asarray(p_exact, dtype=float)
    p_single = np.asarray(p_single, dtype=float)
    if p_exact.shape != p_single.shape:
        raise ContractError("distributions live on different spaces")
    idx = top_k_indices(p_exact, k)
    pe = p_exact[idx]
    pe = pe / pe.sum()
    ps = np.maximum(p_single[idx], KL_FLOOR)
    ps = ps / ps.sum()
    nz = pe > 0
    return float(abs(np.sum(pe[nz] * np.log(pe[nz] / ps[nz]))))


def trajectory_distributions(
    circuit: NoisyCircuit, spec: SamplerSpec | None, indices, master_seed=0, stream=0, batch_size=None
):
    """Yield (index, normalized Z-basis distribution) for each trajectory, in index order."""
    compiled = compile_circuit(circuit, spec)
    batch_size = batch_size or default_batch_size(circuit.num_qubits)
    for chunk in _chunks(list(indices), batch_size):
        _, psi = compiled.run_batch(chunk, master_seed, stream, final_state=True)
        p = np.abs(psi) ** 2
        p /= p.sum(axis=1, keepdims=True)
        yield from zip(chunk, p)


def mean_distribution(circuit, spec, n_trajectories, master_seed=0, stream=0, batch_size=None):
    total = np.zeros(1 << circuit.num_qubits)
    for _, p in trajectory_distributions(circuit, spec, range(n_trajectories), master_seed, stream, batch_size):
        total += p
    return total / n_trajectories


def entropy_ensemble(
    circuit: NoisyCircuit,
    spec: SamplerSpec | None,
    n_trajectories: int,
    master_seed: int = 0,
    stream: int = 0,
    batch_size: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-record-point mean and sample variance of the circuit's entropy observable."""
    kinds = [obs.kind for _, obs in circuit.observables]
    if "entropy" not in kinds:
        raise ContractError("circuit does not record an entropy observable")
    k = kinds.index("entropy")
    vals = run_ensemble(circuit, spec, n_trajectories, master_seed, stream, batch_size)[:, :, k]
    mean = _fsum_mean(vals)
    return mean, _sample_variance(vals, mean)
