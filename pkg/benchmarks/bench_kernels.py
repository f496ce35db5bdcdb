#!/usr/bin/env python3
"""Benchmark the numba-jitted statevector kernels against the pure-numpy
fallback, on raw gate sweeps and on end-to-end trajectory sampling.

Usage:
    python benchmarks/bench_kernels.py [--max-qubits 20] [--repeats 5]

The active path for the package itself is chosen at import time by the
NOISEKIT_NUMBA env var; this script times both paths explicitly.
"""
import argparse
import time

import numpy as np

from noisekit._kernels import NUMBA_KERNELS, NUMPY_KERNELS
from noisekit.applications import build_ghz
from noisekit.devices import line, uniform_truth
from noisekit.simulator import TrajectorySampler


def _random_state(n, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return (psi / np.linalg.norm(psi)).astype(complex)


def time_gate_sweep(kernels, n, repeats):
    """One H + CNOT layer across all qubits, like a GHZ round."""
    psi = _random_state(n)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernels.h(psi, 1 << (n - 1))
        for q in range(n - 1):
            kernels.cnot(psi, 1 << (n - 1 - q), 1 << (n - 2 - q))
        best = min(best, time.perf_counter() - start)
    return best


def time_sampling(kernels, n, shots, repeats):
    topo = line(n)
    sampler = TrajectorySampler(build_ghz(n, topo), uniform_truth(topo),
                                kernels=kernels)
    best = float("inf")
    for r in range(repeats):
        start = time.perf_counter()
        sampler.sample(shots, seed=r)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-qubits", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--shots", type=int, default=8192)
    args = parser.parse_args()

    if NUMBA_KERNELS is None:
        print("numba unavailable; nothing to compare")
        return

    # trigger jit compilation outside the timed region
    warm = _random_state(4)
    for gate in ("h", "x", "y", "z"):
        getattr(NUMBA_KERNELS, gate)(warm, 2)
    NUMBA_KERNELS.cnot(warm, 4, 1)

    print(f"gate-layer sweep (best of {args.repeats}):")
    print(f"{'n':>4} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for n in range(10, args.max_qubits + 1, 2):
        t_np = time_gate_sweep(NUMPY_KERNELS, n, args.repeats)
        t_nb = time_gate_sweep(NUMBA_KERNELS, n, args.repeats)
        print(f"{n:>4} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.2f}x")

    print(f"\nGHZ trajectory sampling, {args.shots} shots (best of {args.repeats}):")
    print(f"{'n':>4} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9}")
    for n in (6, 10, 14):
        t_np = time_sampling(NUMPY_KERNELS, n, args.shots, args.repeats)
        t_nb = time_sampling(NUMBA_KERNELS, n, args.shots, args.repeats)
        print(f"{n:>4} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
