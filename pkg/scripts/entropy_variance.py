#!/usr/bin/env python
"""Half-cut entanglement entropy of the tilted-field Ising chain: mean and variance per step."""

import argparse

from analogtraj.channels import depolarizing
from analogtraj.circuits import build_tilted_ising
from analogtraj.density import MAX_DM_QUBITS, evolve_circuit_dm
from analogtraj.harness import entropy_ensemble
from analogtraj.samplers import SamplerSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=10)
    parser.add_argument("--steps", type=int, default=50)
    parser.add_argument("--epsilon", type=float, default=0.003)
    parser.add_argument("--trajectories", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    circuit = build_tilted_ising(args.N, steps=args.steps, noise=depolarizing(2, args.epsilon))
    noiseless = circuit.noiseless_series()[:, 0]
    mixed = evolve_circuit_dm(circuit)[:, 0] if args.N <= MAX_DM_QUBITS else None
    md, vd = entropy_ensemble(circuit, SamplerSpec("digital"), args.trajectories, args.seed, 1)
    ma, va = entropy_ensemble(circuit, SamplerSpec("analog_factorized"), args.trajectories, args.seed, 2)
    print(f"{'step':>5}{'noiseless':>11}{'S(rho)':>9}{'digital':>10}{'var':>11}{'analog':>10}{'var':>11}")
    for s in range(len(md)):
        dm = f"{mixed[s]:>9.4f}" if mixed is not None else f"{'-':>9}"
        print(f"{s:>5}{noiseless[s]:>11.4f}{dm}{md[s]:>10.4f}{vd[s]:>11.2e}{ma[s]:>10.4f}{va[s]:>11.2e}")


if __name__ == "__main__":
    main()
