#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

The hot operations are dense matrix multiply, rank and inverse over
F_p (p = 2^61 - 1 by default), plus two end-to-end workloads: formula
evaluation at matrix tuples and a blow-up rank computation.  Run as

    python benchmarks/bench_kernels.py [--quick] [--prime P]

The pure backend is imported directly, so one process times both paths.
"""

import argparse
import random
import time

import numpy as np

from skewrank._kernels import pure

try:
    from skewrank._kernels import _modmat as compiled
except ImportError:
    compiled = None


def _rand(rng, n, p):
    return np.array(
        [[rng.randrange(p) for _ in range(n)] for _ in range(n)], dtype=np.uint64
    )


def _time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(p, sizes, reps):
    rng = random.Random(7)
    rows = []
    for n in sizes:
        a, b = _rand(rng, n, p), _rand(rng, n, p)
        for name, fn in (
            ("mat_mul", lambda m: m.mat_mul(a, b, p)),
            ("mat_rank", lambda m: m.mat_rank(a, p)),
            ("mat_inv", lambda m: m.mat_inv(a, p)),
        ):
            t_pure = _time(lambda: fn(pure), reps)
            t_comp = _time(lambda: fn(compiled), reps) if compiled else None
            rows.append((f"{name} {n}x{n}", t_pure, t_comp))
    return rows


def bench_workloads(p, quick):
    from skewrank.corpus import random_formula, random_pencil
    from skewrank.field import PrimeField
    from skewrank.oracles import TrialPolicy, rit_eval
    from skewrank.ncrank import RankPolicy, ncrank_pencil

    fld = PrimeField(p)
    phi = random_formula(fld, 60 if quick else 200, 4, seed=1)
    pencil = random_pencil(fld, 3, 3, 3, seed=2)
    rows = []
    t0 = time.perf_counter()
    rit_eval(phi, TrialPolicy(field=fld, dimensions=(4, 8), trials=3, seed=3))
    rows.append(("rit_eval (active backend)", time.perf_counter() - t0, None))
    t0 = time.perf_counter()
    ncrank_pencil(pencil, RankPolicy(k=8 if quick else 16, trials=3, seed=4))
    rows.append(("blow-up rank (active backend)", time.perf_counter() - t0, None))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller sizes, fewer reps")
    ap.add_argument("--prime", type=int, default=2**61 - 1)
    args = ap.parse_args()

    sizes = (16, 48) if args.quick else (16, 64, 160, 320)
    reps = 2 if args.quick else 3

    print(f"modulus = {args.prime}")
    print(f"compiled backend available: {compiled is not None}\n")
    header = f"{'operation':<28}{'pure (s)':>12}{'compiled (s)':>14}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, t_pure, t_comp in bench_kernels(args.prime, sizes, reps):
        if t_comp is not None:
            print(f"{name:<28}{t_pure:>12.5f}{t_comp:>14.5f}{t_pure / t_comp:>9.1f}x")
        else:
            print(f"{name:<28}{t_pure:>12.5f}{'-':>14}{'-':>10}")
    print()
    for name, t, _ in bench_workloads(args.prime, args.quick):
        print(f"{name:<40}{t:>10.4f} s")


if __name__ == "__main__":
    main()
