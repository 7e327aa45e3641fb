"""Command-line front end.

Subcommands: ``build``, ``factorize``, ``simulate``, ``compare``, ``sample-dist``.
Exit codes: 0 ok, 2 configuration error, 3 capacity error, 4 non-physical
factorization.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import angles, circuits
from .channels import (
    PauliChannel,
    DepolarizingChannel,
    coherent,
    depolarizing,
    expand_to_pauli,
    pauli_channel,
)
from .density import MAX_DM_QUBITS, evolve_circuit_dm
from .errors import (
    AnalogTrajError,
    CapacityError,
    ConfigurationError,
    DomainError,
    NonPhysicalFactorizationError,
    SingularChannelError,
)
from .factorization import factorize, verify_factorization
from .harness import (
    KL_CONVENTION,
    TrajectoryReport,
    estimate,
    run_ensemble,
    variance_ratio,
    write_atomic,
)
from .samplers import SamplerSpec, canonical_method

log = logging.getLogger("analogtraj")

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_NONPHYSICAL = 0, 2, 3, 4
BENCHMARKS = ("ising2d", "xy_chain", "maxcut", "tilted_ising", "toy_model", "custom")


@dataclass
class RunConfig:
    benchmark: str = "toy_model"
    params: dict = field(default_factory=dict)
    noise: dict = field(default_factory=lambda: {"type": "depolarizing", "epsilon": 0.001})
    sampler: str = "digital"
    angle_dist: str = "gaussian"
    damping_angle: str = "discrete"
    master_seed: int = 0
    n_trajectories: int | None = None
    target_sem: float | None = None
    max_trajectories: int = 100_000
    backend: str = "statevector"
    out_dir: str = "."

    def validate(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ConfigurationError(f"benchmark: {self.benchmark!r} is not one of {BENCHMARKS}")
        try:
            canonical_method(self.sampler)
            angles.canonical_kind(self.angle_dist)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.backend not in ("statevector", "exact_dm"):
            raise ConfigurationError(f"backend: {self.backend!r} is not statevector or exact_dm")
        if self.backend == "statevector":
            if (self.n_trajectories is None) == (self.target_sem is None):
                raise ConfigurationError("set exactly one of n_trajectories / target_sem")
            if self.n_trajectories is not None and self.n_trajectories < 1:
                raise ConfigurationError("n_trajectories must be positive")
            if self.target_sem is not None and not self.target_sem > 0:
                raise ConfigurationError("target_sem must be positive")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ConfigurationError("master_seed must be a nonnegative integer")

    def spec(self) -> SamplerSpec:
        return SamplerSpec(self.sampler, self.angle_dist, self.damping_angle)


# ---------------------------------------------------------------------------
# config assembly
# ---------------------------------------------------------------------------


def _noise_template(noise: dict):
    kind = noise.get("type", "depolarizing")
    try:
        if kind in ("depolarizing", "depol"):
            return depolarizing(2, float(noise.get("epsilon", 0.001)))
        if kind == "coherent":
            return coherent(float(noise["alpha"]), float(noise["q"]), noise.get("axis", "XX"))
        if kind == "pauli":
            return pauli_channel(noise["probabilities"])
        if kind == "none":
            return None
    except KeyError as exc:
        raise ConfigurationError(f"noise: missing field {exc.args[0]!r}") from None
    raise ConfigurationError(f"noise: type {kind!r} cannot follow a two-qubit gate")


def build_circuit(benchmark: str, params: dict, noise: dict) -> circuits.NoisyCircuit:
    p = dict(params)
    try:
        if benchmark == "custom":
            return circuits.load_circuit(p["circuit"])
        if benchmark == "toy_model":
            return circuits.build_toy_model(float(p.get("q", 0.01)), int(p.get("n", 50)))
        template = _noise_template(noise)
        if benchmark == "ising2d":
            return circuits.build_ising_2d(
                int(p.get("lx", 4)), int(p.get("ly", 4)), float(p.get("h", 1.0)),
                float(p.get("dt", 0.1)), int(p.get("steps", 30)), template,
            )
        if benchmark == "xy_chain":
            return circuits.build_xy_chain(
                int(p.get("N", 8)), float(p.get("tau", 0.25)), int(p.get("steps", 25)), template
            )
        if benchmark == "maxcut":
            graph = circuits.random_3_regular_graph(int(p.get("N", 12)), int(p.get("graph_seed", 1)))
            return circuits.build_maxcut_floquet(
                graph, int(p.get("T", 40)), float(p.get("dt", 0.25)), template,
                int(p.get("zz_sign", -1)),
            )
        if benchmark == "tilted_ising":
            return circuits.build_tilted_ising(
                int(p.get("N", 10)), float(p.get("hx", 0.9045)), float(p.get("hz", 0.8090)),
                float(p.get("dt", 0.3)), int(p.get("steps", 50)), template,
            )
    except KeyError as exc:
        raise ConfigurationError(f"params: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"params: {exc}") from None
    raise ConfigurationError(f"benchmark: unknown {benchmark!r}")


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"{path}: unknown field(s) {sorted(unknown)}")
    return data


_PARAM_FLAGS = ("q", "n", "lx", "ly", "h", "dt", "steps", "N", "tau", "T", "graph_seed", "hx", "hz", "circuit")


def config_from_args(args) -> RunConfig:
    data = load_config_file(args.config) if getattr(args, "config", None) else {}
    cfg = RunConfig(**data)
    cfg.params = dict(cfg.params)
    cfg.noise = dict(cfg.noise)
    for name in ("benchmark", "sampler", "angle_dist", "damping_angle", "master_seed",
                 "n_trajectories", "target_sem", "max_trajectories", "out_dir"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "exact", False):
        cfg.backend = "exact_dm"
    for name in _PARAM_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            cfg.params[name] = value
    if getattr(args, "noise", None) is not None:
        cfg.noise["type"] = args.noise
    for key in ("epsilon", "alpha", "noise_q"):
        value = getattr(args, key, None)
        if value is not None:
            cfg.noise["q" if key == "noise_q" else key] = value
    cfg.sampler = {"analog": "analog_factorized"}.get(cfg.sampler, cfg.sampler)
    return cfg


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _write_outputs(out_dir: str, files: dict[str, str]) -> list[str]:
    """Write every file through a temporary name; nothing lands before all content exists."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        write_atomic(path, text)
        paths.append(path)
    return paths


def factorization_diagnostics(circuit, spec: SamplerSpec) -> list[dict]:
    out = []
    for ch in sorted(circuit.channels(), key=repr):
        if not isinstance(ch, (PauliChannel, DepolarizingChannel)):
            continue
        probs = expand_to_pauli(ch)
        fac = factorize(probs)
        diag = {
            "channel": repr(ch),
            "q_S": {s.label: q for s, q in sorted(fac.factors.items())},
            "residual": verify_factorization(probs, fac),
            "all_physical": fac.all_physical,
        }
        log.info("factorization %s residual=%.3g all_physical=%s", ch.kind, diag["residual"], fac.all_physical)
        out.append(diag)
        if spec.method == "analog_factorized" and not fac.all_physical:
            bad = ", ".join(f"q_{s}={q:.6g}" for s, q in fac.negative_factors())
            raise NonPhysicalFactorizationError(
                f"non-physical factors ({bad}); rerun with --sampler analog-random-rotation"
            )
    return out


def _config_record(cfg: RunConfig) -> dict:
    return asdict(cfg)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    cfg = config_from_args(args)
    circuit = build_circuit(cfg.benchmark, cfg.params, cfg.noise)
    text = circuit.dumps()
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def _channel_from_args(args):
    if args.channel in ("depol", "depolarizing"):
        return depolarizing(args.qubits, args.epsilon)
    if args.channel == "pauli":
        if not args.probs:
            raise ConfigurationError("--probs is required for --channel pauli")
        try:
            probs = json.loads(args.probs)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"--probs: column {exc.colno}: {exc.msg}") from None
        return pauli_channel(probs)
    raise ConfigurationError(f"--channel: unknown {args.channel!r}")


def cmd_factorize(args) -> int:
    channel = _channel_from_args(args)
    probs = expand_to_pauli(channel)
    fac = factorize(probs)
    result = {
        "channel": repr(channel),
        "q_S": {s.label: q for s, q in sorted(fac.factors.items())},
        "residual": verify_factorization(probs, fac),
        "all_physical": fac.all_physical,
    }
    text = json.dumps(result, indent=1)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK if fac.all_physical else EXIT_NONPHYSICAL


def cmd_simulate(args) -> int:
    cfg = config_from_args(args)
    cfg.validate()
    circuit = build_circuit(cfg.benchmark, cfg.params, cfg.noise)
    spec = cfg.spec()
    diagnostics = factorization_diagnostics(circuit, spec)
    meta = {"config": _config_record(cfg), "master_seed": cfg.master_seed, "factorization": diagnostics}
    if cfg.backend == "exact_dm":
        if circuit.num_qubits > MAX_DM_QUBITS:
            raise CapacityError(f"exact_dm backend supports N <= {MAX_DM_QUBITS}, got {circuit.num_qubits}")
        exact = evolve_circuit_dm(circuit)
        summary = {
            "record_points": list(circuit.record_points),
            "observables": {
                name: {"mean": exact[:, k].tolist()} for k, name in enumerate(circuit.observable_names)
            },
            "metadata": meta,
        }
        rows = [
            (p, name, repr(float(exact[r, k])), 0.0, 0.0, 0)
            for r, p in enumerate(circuit.record_points)
            for k, name in enumerate(circuit.observable_names)
        ]
        files = {
            "summary.json": json.dumps(summary, indent=1),
            "summary.csv": _csv_text(("record_point", "observable_name", "mean", "variance", "sem", "n"), rows),
        }
    else:
        if cfg.target_sem is not None:
            report = estimate(circuit, spec, cfg.target_sem, cfg.max_trajectories, cfg.master_seed)
        else:
            values = run_ensemble(circuit, spec, cfg.n_trajectories, cfg.master_seed)
            report = TrajectoryReport.from_values(values, circuit, "fixed_count")
        report.metadata.update(meta)
        files = {
            "summary.json": json.dumps(report.to_json(), indent=1),
            "summary.csv": _csv_text(
                ("record_point", "observable_name", "mean", "variance", "sem", "n"), report.summary_rows()
            ),
            "raw.csv": _csv_text(
                ("trajectory_index", "record_point", "observable_name", "value"), report.raw_rows()
            ),
        }
    for path in _write_outputs(cfg.out_dir, files):
        log.info("wrote %s", path)
    final = json.loads(files["summary.json"])["observables"]
    for name, stats in final.items():
        sys.stdout.write(f"{name}: final mean {stats['mean'][-1]:.10g}\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = config_from_args(args)
    if cfg.n_trajectories is None:
        raise ConfigurationError("compare needs --n-traj")
    cfg.target_sem = None
    cfg.validate()
    circuit = build_circuit(cfg.benchmark, cfg.params, cfg.noise)
    analog = SamplerSpec("analog_factorized" if cfg.sampler == "digital" else cfg.sampler, cfg.angle_dist)
    diagnostics = factorization_diagnostics(circuit, analog)
    ratio, rd, ra = variance_ratio(circuit, cfg.n_trajectories, cfg.master_seed, analog=analog)
    rows = [
        (p, name, repr(float(rd.variance[r, k])), repr(float(ra.variance[r, k])), repr(float(ratio[r, k])))
        for r, p in enumerate(circuit.record_points)
        for k, name in enumerate(circuit.observable_names)
    ]
    result = {
        "config": _config_record(cfg),
        "master_seed": cfg.master_seed,
        "analog_sampler": analog.method,
        "factorization": diagnostics,
        "record_points": list(circuit.record_points),
        "ratio": {name: ratio[:, k].tolist() for k, name in enumerate(circuit.observable_names)},
        "streams": {"digital": 1, "analog": 2},
        "kl_convention": KL_CONVENTION,
    }
    files = {
        "variance_ratio.csv": _csv_text(
            ("record_point", "observable_name", "var_digital", "var_analog", "ratio"), rows
        ),
        "compare.json": json.dumps(result, indent=1),
    }
    _write_outputs(cfg.out_dir, files)
    tail = ratio[-min(10, len(ratio)) :, 0]
    sys.stdout.write(f"mean ratio over last {len(tail)} record points: {float(np.mean(tail)):.4g}\n")
    return EXIT_OK


def cmd_sample_dist(args) -> int:
    kind = angles.canonical_kind(args.kind)
    dist = angles.make_distribution(kind, args.q)
    rng = np.random.default_rng(args.seed)
    draws = dist.sample(rng, args.count)
    sin2, sin4 = angles.second_moment_check(dist) if kind != "discrete" else (
        angles.sin2_moment(kind, dist.scale), angles.sin4_moment(kind, dist.scale))
    report = {
        "kind": kind,
        "q": args.q,
        "scale": dist.scale,
        "seed": args.seed,
        "E_sin2_quadrature": sin2,
        "E_sin4_quadrature": sin4,
        "E_sin2_sample": float(np.mean(np.sin(draws) ** 2)),
        "closed_form_report": [r for r in angles.closed_form_report((args.q,)) if r["kind"] == kind],
    }
    files = {
        "draws.csv": _csv_text(("index", "theta"), ((i, repr(float(t))) for i, t in enumerate(draws))),
        "moments.json": json.dumps(report, indent=1),
    }
    _write_outputs(args.out_dir, files)
    sys.stdout.write(f"{kind} scale={dist.scale:.10g} E[sin^2]={sin2:.12g}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_benchmark_flags(p):
    p.add_argument("--config", help="JSON RunConfig file; flags override it")
    p.add_argument("--benchmark", choices=BENCHMARKS)
    p.add_argument("--circuit", help="circuit JSON for --benchmark custom")
    p.add_argument("--q", type=float, help="toy model flip probability")
    p.add_argument("--n", type=int, help="toy model gate count")
    p.add_argument("--lx", type=int)
    p.add_argument("--ly", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--N", "--num-qubits", dest="N", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--T", type=int)
    p.add_argument("--graph-seed", dest="graph_seed", type=int)
    p.add_argument("--hx", type=float)
    p.add_argument("--hz", type=float)
    p.add_argument("--noise", choices=("depolarizing", "coherent", "none"))
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--noise-q", dest="noise_q", type=float)


def _add_run_flags(p):
    p.add_argument("--sampler", choices=("digital", "analog", "analog-random-rotation"))
    p.add_argument("--angle-dist", dest="angle_dist", choices=angles.KINDS + ("raised-cosine",))
    p.add_argument("--damping-angle", dest="damping_angle", choices=("discrete", "gaussian"))
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--n-traj", dest="n_trajectories", type=int)
    p.add_argument("--target-sem", dest="target_sem", type=float)
    p.add_argument("--max-traj", dest="max_trajectories", type=int)
    p.add_argument("--out-dir", dest="out_dir")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="analogtraj", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="emit a benchmark circuit as JSON")
    _add_benchmark_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("factorize", help="factorize a Pauli channel")
    p.add_argument("--channel", default="depol", choices=("depol", "depolarizing", "pauli"))
    p.add_argument("--qubits", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--probs", help='JSON map, e.g. \'{"I": 0.9, "X": 0.1}\'')
    p.add_argument("--out")
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("simulate", help="run a trajectory ensemble or the exact oracle")
    _add_benchmark_flags(p)
    _add_run_flags(p)
    p.add_argument("--exact", action="store_true", help="use the density-matrix backend")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="digital/analog variance ratio per record point")
    _add_benchmark_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sample-dist", help="draw from an angle distribution and check moments")
    p.add_argument("--kind", default="gaussian", choices=angles.KINDS + ("raised-cosine",))
    p.add_argument("--q", type=float, default=0.01)
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", dest="out_dir", default=".")
    p.set_defaults(func=cmd_sample_dist)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except NonPhysicalFactorizationError as exc:
        log.error("%s", exc)
        return EXIT_NONPHYSICAL
    except CapacityError as exc:
        log.error("%s", exc)
        return EXIT_CAPACITY
    except (ConfigurationError, DomainError, SingularChannelError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except AnalogTrajError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
