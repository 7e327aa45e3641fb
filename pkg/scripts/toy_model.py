#!/usr/bin/env python
"""Toy model: empirical mean and variance of <Z> against the closed forms, per sampler."""

import argparse

import numpy as np

from analogtraj.circuits import build_toy_model
from analogtraj.harness import run_ensemble, toy_model_stats
from analogtraj.samplers import SamplerSpec


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--q", type=float, default=0.01)
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--trajectories", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    circuit = build_toy_model(args.q, args.n)
    print(f"q={args.q} n={args.n} exact mean {(1 - 2 * args.q) ** args.n:.6f}")
    print(f"{'sampler':<22}{'mean':>10}{'variance':>12}{'closed form':>14}")
    rows = [("digital", SamplerSpec("digital"))]
    rows += [(k, SamplerSpec("analog_factorized", k)) for k in ("gaussian", "discrete", "uniform", "cauchy")]
    for stream, (name, spec) in enumerate(rows):
        vals = run_ensemble(circuit, spec, args.trajectories, args.seed, stream)[:, -1, 0]
        _, closed = toy_model_stats(args.q, args.n, name)
        print(f"{name:<22}{np.mean(vals):>10.5f}{np.var(vals, ddof=1):>12.5f}{closed:>14.5f}")


if __name__ == "__main__":
    main()
