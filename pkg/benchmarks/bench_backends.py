"""Time the numba kernels against the pure-numpy fallback.

Run from the repository root:

    python benchmarks/bench_backends.py [--repeats N]

The first numba call in each section pays JIT compilation; a warmup pass
is excluded from the timings.
"""

import argparse
import time

import numpy as np

from pacbayes import (
    ConstantPolicy,
    DiscreteDistribution,
    DistanceKind,
    GeneratorSpec,
    ProfileShape,
    backend,
    fp_solve,
    generate_profile,
    ik_constant,
    kl_lower_root_batch,
    kl_upper_root_batch,
)


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_constants():
    def run():
        ik_constant.cache_clear()  # the cache would otherwise absorb the work
        for m in (10, 50, 100, 500, 1000):
            ik_constant(DistanceKind.LIN, m, ConstantPolicy.EXACT_LOGSPACE)
            ik_constant(DistanceKind.SQ, m, ConstantPolicy.EXACT_LOGSPACE)

    return run


def bench_kl_roots(n):
    rng = np.random.default_rng(0)
    phats = rng.uniform(0.0, 1.0, n)
    xs = rng.uniform(0.0, 3.0, n)

    def run():
        kl_upper_root_batch(phats, xs)
        kl_lower_root_batch(phats, xs)

    return run


def bench_fp_solve(kind, h, m):
    profile = generate_profile(GeneratorSpec(h=h, v=m, shape=ProfileShape.MODERATE, seed=1))
    prior = DiscreteDistribution.uniform(h)

    def run():
        fp_solve(kind, profile, prior, 0.05)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args()

    sections = [
        ("threshold constants (lin+sq, 5 sizes)", bench_constants()),
        ("kl roots, batch of 100k", bench_kl_roots(100_000)),
        ("fp_solve sq, h=2000 m=2000", bench_fp_solve(DistanceKind.SQ, 2000, 2000)),
        ("fp_solve kl, h=2000 m=2000", bench_fp_solve(DistanceKind.KL, 2000, 2000)),
    ]

    results = {}
    for name in ("numba", "numpy"):
        try:
            backend.use(name)
        except ImportError:
            print(f"{name}: not available, skipping")
            continue
        backend.warmup()
        ik_constant.cache_clear()
        for label, fn in sections:
            fn()  # warmup pass, outside the timing
            results[(name, label)] = best_of(args.repeats, fn)

    width = max(len(label) for label, _ in sections)
    print(f"{'section':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, _ in sections:
        tb = results.get(("numba", label))
        tn = results.get(("numpy", label))
        nb = f"{tb * 1000:.2f} ms" if tb is not None else "-"
        np_ = f"{tn * 1000:.2f} ms" if tn is not None else "-"
        ratio = f"{tn / tb:.1f}x" if tb and tn else "-"
        print(f"{label:<{width}}  {nb:>10}  {np_:>10}  {ratio:>8}")


if __name__ == "__main__":
    main()
