#!/usr/bin/env python3
"""Benchmark the compiled trajectory kernel against the NumPy fallback.

Runs the phase-noise ensemble hot loop at a few representative sizes and
prints per-backend wall times and the speedup.  Usage:

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import math
import sys
import time

from nmr_squeeze.core import make_state
from nmr_squeeze.evolve import NoiseModel, phase_noise_ensemble
from nmr_squeeze.hamiltonians import nmr_space
from nmr_squeeze.kernels import available_backends


def run_case(dim, n_traj, backend):
    space = nmr_space(dim)
    vac = make_state(space, {"b": 0})
    noise = NoiseModel(D=0.01, beta=0.5, phi0=math.pi / 2, n_traj=n_traj,
                       dt=1e-3, master_seed=42,
                       diffusion_factor=2.1685165482230695)
    t0 = time.perf_counter()
    stats = phase_noise_ensemble(noise, 1.0, space, vac, tau=1.0,
                                 grid_points=5, backend=backend)
    elapsed = time.perf_counter() - t0
    return elapsed, float(stats.dx_over_x0()[-1])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller trajectory counts")
    args = parser.parse_args()

    backends = available_backends()
    if backends == ["python"]:
        print("compiled kernel not built; benchmarking the fallback only",
              file=sys.stderr)

    cases = [(80, 500), (96, 500), (128, 500), (80, 2000)]
    if args.quick:
        cases = [(80, 200), (96, 200)]

    print(f"{'dim':>5} {'n_traj':>7} " +
          " ".join(f"{b:>12}" for b in backends) + f" {'speedup':>9}")
    for dim, n_traj in cases:
        times = {}
        values = {}
        for b in backends:
            times[b], values[b] = run_case(dim, n_traj, b)
        if len(backends) == 2:
            agree = abs(values["cython"] - values["python"])
            if agree > 1e-10:
                print(f"WARNING: backend disagreement {agree:.2e}",
                      file=sys.stderr)
            speedup = times["python"] / times["cython"]
        else:
            speedup = float("nan")
        print(f"{dim:>5} {n_traj:>7} " +
              " ".join(f"{times[b]:>11.3f}s" for b in backends) +
              f" {speedup:>8.2f}x")


if __name__ == "__main__":
    main()
