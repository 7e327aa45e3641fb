#!/usr/bin/env python
"""Digital/analog variance ratio of the 2D Ising magnetization per Trotter step."""

import argparse

import numpy as np

from analogtraj.channels import depolarizing
from analogtraj.circuits import build_ising_2d
from analogtraj.harness import variance_ratio
from analogtraj.samplers import SamplerSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lx", type=int, default=4)
    parser.add_argument("--ly", type=int, default=4)
    parser.add_argument("--steps", type=int, default=30)
    parser.add_argument("--epsilon", type=float, default=0.001)
    parser.add_argument("--trajectories", type=int, default=700)
    parser.add_argument("--angle-dist", default="gaussian")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    circuit = build_ising_2d(args.lx, args.ly, 1.0, 0.1, args.steps, depolarizing(2, args.epsilon))
    analog = SamplerSpec("analog_factorized", args.angle_dist)
    ratio, rd, ra = variance_ratio(circuit, args.trajectories, args.seed, analog=analog)
    print(f"{'step':>5}{'mean':>11}{'var digital':>14}{'var analog':>14}{'ratio':>10}")
    for step in range(len(ratio)):
        print(f"{step:>5}{ra.mean[step, 0]:>11.5f}{rd.variance[step, 0]:>14.3e}"
              f"{ra.variance[step, 0]:>14.3e}{ratio[step, 0]:>10.2f}")
    print(f"mean ratio over last 10 steps: {np.mean(ratio[-10:, 0]):.2f}")


if __name__ == "__main__":
    main()
