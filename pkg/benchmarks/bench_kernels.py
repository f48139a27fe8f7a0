#!/usr/bin/env python3
"""Benchmark the compiled Monte-Carlo kernel against the NumPy fallback.

Runs the same seeded workloads through both backends, checks the outputs are
bit-identical, and prints per-backend timings with the speedup.

    python benchmarks/bench_kernels.py [--samples N] [--steps N]
"""

import argparse
import time

import numpy as np

from complimits._kernels import _pymc

try:
    from complimits._kernels import _cymc
except ImportError:
    _cymc = None


def build_workload(states=4, seed=7):
    rng = np.random.default_rng(seed)
    kern = rng.dirichlet(np.ones(states), size=states)
    cum = np.cumsum(kern, axis=1)
    cum[:, -1] = 1.0
    info = -np.log2(kern)
    init = np.full(states, 1.0 / states)
    init_cum = np.cumsum(init)
    init_cum[-1] = 1.0
    init_info = -np.log2(init)
    return (
        np.ascontiguousarray(cum),
        np.ascontiguousarray(info),
        np.ascontiguousarray(init_cum),
        np.ascontiguousarray(init_info),
    )


def run(impl, samples, steps, seed):
    cum, info, init_cum, init_info = build_workload()
    rng = np.random.Generator(np.random.PCG64(seed))
    states = np.empty(samples, dtype=np.int64)
    acc = np.zeros(samples)
    t0 = time.perf_counter()
    impl.initial_step(rng.random(samples), init_cum, init_info, states, acc)
    for _ in range(steps):
        impl.markov_step(rng.random(samples), cum, info, states, acc)
    return time.perf_counter() - t0, acc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    transitions = args.samples * args.steps
    print(f"workload: {args.samples} chains x {args.steps} steps = {transitions:.2e} transitions")

    results = {}
    for name, impl in [("python", _pymc)] + ([("cython", _cymc)] if _cymc else []):
        best = None
        acc = None
        for rep in range(args.repeats):
            elapsed, acc = run(impl, args.samples, args.steps, seed=42)
            best = elapsed if best is None else min(best, elapsed)
        results[name] = (best, acc)
        rate = transitions / best
        print(f"{name:>7}: {best:8.3f} s   ({rate:.2e} transitions/s)")

    if _cymc is None:
        print("compiled kernel unavailable; only the fallback was benchmarked")
        return
    py_time, py_acc = results["python"]
    cy_time, cy_acc = results["cython"]
    identical = np.array_equal(py_acc, cy_acc)
    print(f"speedup: {py_time / cy_time:.2f}x   outputs bit-identical: {identical}")
    if not identical:
        raise SystemExit("backend outputs diverged")


if __name__ == "__main__":
    main()
