#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the same seeded searches under both backends, reports steps/s and the
speedup, and checks that the two trajectories are bit-for-bit identical.

    python3 benchmarks/bench_backends.py --n 100 --gamma 4 --steps 200000
"""
import argparse
import time

import numpy as np

import eoclust as eo
from eoclust import _kernels


def time_run(graph, config, repeat):
    best_dt = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = eo.run(graph, config)
        best_dt = min(best_dt, time.perf_counter() - t0)
    return result, best_dt


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=100, help="reports per instance")
    parser.add_argument("--gamma", type=float, default=4.0)
    parser.add_argument("--k", type=int, default=3)
    parser.add_argument("--tau", type=float, default=1.5)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--numpy-steps", type=int, default=20_000,
                        help="smaller budget for the slow fallback")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--ranking", choices=["sort", "heap"], default="sort")
    args = parser.parse_args()

    if "numba" not in eo.available_backends():
        parser.error("numba is not installed; nothing to compare")

    reports = eo.generate_scenario(
        eo.ScenarioParams(num_targets=args.k, reports_per_burst=args.n, seed=args.seed)
    )
    graph = eo.sample_sparse_graph(
        reports, eo.SparseSamplerParams(gamma=args.gamma, seed=args.seed)
    )

    # correctness first: identical trajectories on a shared budget
    check_steps = min(args.numpy_steps, args.steps)
    config_check = eo.EngineConfig(
        k=args.k, tau=args.tau, max_steps=check_steps, seed=args.seed, ranking=args.ranking
    )
    _kernels.set_backend("numba")
    (_, trace_nb), _ = time_run(graph, config_check, 1)
    _kernels.set_backend("numpy")
    (_, trace_np), _ = time_run(graph, config_check, 1)
    identical = np.array_equal(trace_nb.current_cost, trace_np.current_cost) and np.array_equal(
        trace_nb.best_cost, trace_np.best_cost
    )
    print(f"backends bit-identical over {check_steps} steps: {identical}")
    if not identical:
        raise SystemExit("backend mismatch; benchmark numbers would be meaningless")

    rows = []
    for backend, steps in (("numba", args.steps), ("numpy", args.numpy_steps)):
        _kernels.set_backend(backend)
        config = eo.EngineConfig(
            k=args.k, tau=args.tau, max_steps=steps, seed=args.seed, ranking=args.ranking
        )
        time_run(graph, config, 1)  # warm (jit compile, caches)
        _, dt = time_run(graph, config, args.repeat)
        rows.append((backend, steps, steps / dt, 1e6 * dt / steps))
    _kernels.set_backend("numba")

    print(f"\nn={args.n} gamma={args.gamma} k={args.k} tau={args.tau} ranking={args.ranking}")
    print(f"{'backend':<8} {'steps':>9} {'steps/s':>12} {'us/step':>9}")
    for backend, steps, rate, us in rows:
        print(f"{backend:<8} {steps:>9} {rate:>12,.0f} {us:>9.3f}")
    print(f"\nspeedup (numba vs numpy): {rows[0][2] / rows[1][2]:.1f}x")


if __name__ == "__main__":
    main()
