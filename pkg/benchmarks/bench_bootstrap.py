"""Benchmark the compiled resampling kernel against the numpy fallback.

Usage:
    python3 benchmarks/bench_bootstrap.py [--targets 500] [--resamples 10000]
                                          [--repeats 5]

The two paths are verified to agree bit for bit before timing.
"""

import argparse
import time

import numpy as np

from tvcp import _kernels
from tvcp._kernels.fallback import bootstrap_diffs as py_diffs


def time_fn(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--targets", type=int, default=500)
    parser.add_argument("--resamples", type=int, default=10_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    num_a = rng.integers(0, 4, size=args.targets).astype(np.int64)
    num_b = rng.integers(0, 4, size=args.targets).astype(np.int64)
    den = np.full(args.targets, 3, dtype=np.int64)
    idx = rng.integers(0, args.targets, size=(args.resamples, args.targets), dtype=np.int64)

    if _kernels.KERNEL_BACKEND != "cython":
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        print("timing the numpy fallback only")
        fallback = time_fn(py_diffs, (num_a, num_b, den, idx), args.repeats)
        print(f"numpy fallback: {fallback * 1e3:8.2f} ms")
        return 0

    cy = _kernels.bootstrap_diffs
    assert np.array_equal(cy(num_a, num_b, den, idx), py_diffs(num_a, num_b, den, idx)), (
        "kernel paths disagree"
    )

    compiled = time_fn(cy, (num_a, num_b, den, idx), args.repeats)
    fallback = time_fn(py_diffs, (num_a, num_b, den, idx), args.repeats)
    print(f"targets={args.targets} resamples={args.resamples} (best of {args.repeats})")
    print(f"  compiled kernel : {compiled * 1e3:8.2f} ms")
    print(f"  numpy fallback  : {fallback * 1e3:8.2f} ms")
    print(f"  speedup         : {fallback / compiled:8.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
