#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the numpy fallback.

Runs the full round pipeline (counter-based RNG front end plus kernel)
at several block sizes with both backends, checks that the histograms
agree exactly, and reports throughput. A kernel-only microbenchmark
isolates the accumulate stage from the shared RNG front end.
"""

import argparse
import math
import time
from dataclasses import replace

import numpy as np

from cvqkdsec import _kernels
from cvqkdsec.bounds import ChannelModel
from cvqkdsec.constellation import ConstellationSpec, build_grid
from cvqkdsec.covariance import MeasurementSpec
from cvqkdsec.sim import SimConfig, _box_muller, run_simulation


def reference_config(n_rounds, seed=7, threads=1):
    spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=6)
    sigma_b = math.sqrt(0.1 * 3.0 + 1e-4 + 1.0)
    return SimConfig(
        grid=build_grid(spec),
        ch=ChannelModel.from_excess_noise(0.1, 1e-4),
        meas=MeasurementSpec(M=6 * sigma_b, R_B=6 * sigma_b, b_B=6),
        n_rounds=n_rounds,
        seed=seed,
        threads=threads,
    )


def time_full_pipeline(cfg, backend, repeats=3):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = run_simulation(replace(cfg, backend=backend))
        best = min(best, time.perf_counter() - t0)
    return best, result


def time_kernel_only(backend_module, n=1 << 20, repeats=5):
    rng = np.random.Generator(np.random.Philox(key=1, counter=0))
    u = rng.random((n, 4))
    z1, z2 = _box_muller(u[:, 1], u[:, 2])
    q_a = np.ascontiguousarray(2.0 * u[:, 0] - 1.0)
    p_a = np.ascontiguousarray(2.0 * u[:, 3] - 1.0)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        backend_module.accumulate_rounds(q_a, p_a, z1, z2, math.sqrt(0.1),
                                         1.0, 6.0, 6.0, 0.19, 64, False)
        best = min(best, time.perf_counter() - t0)
    return n / best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=float, nargs="*", default=[1e5, 1e6, 1e7])
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    if not _kernels.HAVE_COMPILED:
        print("compiled kernel not built; benchmarking the numpy fallback only")

    print(f"{'rounds':>10} {'python s':>10} {'python r/s':>12}", end="")
    if _kernels.HAVE_COMPILED:
        print(f" {'compiled s':>11} {'compiled r/s':>13} {'speedup':>8} {'match':>6}")
    else:
        print()

    for rounds in args.rounds:
        n = int(rounds)
        cfg = reference_config(n, threads=args.threads)
        t_py, res_py = time_full_pipeline(cfg, "python")
        line = f"{n:>10d} {t_py:>10.3f} {n / t_py:>12.3e}"
        if _kernels.HAVE_COMPILED:
            t_c, res_c = time_full_pipeline(cfg, "compiled")
            match = np.array_equal(res_py.bin_histogram, res_c.bin_histogram)
            line += f" {t_c:>11.3f} {n / t_c:>13.3e} {t_py / t_c:>8.2f} {str(match):>6}"
            if not match:
                raise SystemExit("backend histograms disagree")
        print(line)

    print("\nkernel-only throughput (rounds/s, RNG front end excluded):")
    print(f"  python:   {time_kernel_only(_kernels.pyref):.3e}")
    if _kernels.HAVE_COMPILED:
        print(f"  compiled: {time_kernel_only(_kernels._simcore):.3e}")


if __name__ == "__main__":
    main()
