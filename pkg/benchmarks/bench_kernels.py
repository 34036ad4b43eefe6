#!/usr/bin/env python3
"""Time the JIT-compiled PAV kernel against the interpreted fallback.

The library picks one implementation at import time (CLUSTERLASSO_NO_NUMBA),
but both stay importable, so a single process can race them: the
numba-compiled sweep versus the same function body interpreted.  The full
prox (sort + shift + PAV + unsort + threshold) is timed alongside to show
how much of its cost the kernel accounts for.

Input patterns stress the sweep differently: random input merges a constant
fraction of blocks, ascending input merges everything into one block (every
step pools), descending input never merges (the cone constraint is slack).
"""

import argparse
import time

import numpy as np

from clusterlasso._kernels import (
    NUMBA_ENABLED,
    pav_nonincreasing,
    pav_nonincreasing_py,
    warmup,
)
from clusterlasso.prox import Penalties, prox_clustered


PATTERNS = {
    "normal": lambda rng, n: rng.normal(size=n),
    "ascending": lambda rng, n: np.sort(rng.normal(size=n)),
    "descending": lambda rng, n: -np.sort(rng.normal(size=n)),
}


def best_time(fn, arg, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(arg)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(
        description="Benchmark the PAV kernel: numba JIT vs interpreted.")
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[10 ** 4, 10 ** 5, 10 ** 6],
                    help="input lengths to time (default: 1e4 1e5 1e6)")
    ap.add_argument("--reps", type=int, default=5,
                    help="repetitions per cell, best time kept (default: 5)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    warmup()
    rng = np.random.default_rng(args.seed)
    pen = Penalties(0.1, 1e-6)

    if NUMBA_ENABLED:
        print("numba JIT active; 'pav jit' is the compiled sweep")
    else:
        print("numba disabled; 'pav jit' falls back to the interpreted sweep")
    header = (f"{'pattern':<11} {'n':>9} {'pav jit (ms)':>13} "
              f"{'pav py (ms)':>13} {'speedup':>8} {'prox (ms)':>11}")
    print(header)
    print("-" * len(header))
    for name, gen in PATTERNS.items():
        for n in args.sizes:
            v = gen(rng, n)
            py_reps = args.reps if n <= 10 ** 5 else min(args.reps, 2)
            t_jit = best_time(pav_nonincreasing, v, args.reps)
            t_py = best_time(pav_nonincreasing_py, v, py_reps)
            t_prox = best_time(lambda y: prox_clustered(y, pen), v, args.reps)
            print(f"{name:<11} {n:>9} {t_jit * 1e3:>13.3f} "
                  f"{t_py * 1e3:>13.3f} {t_py / t_jit:>7.1f}x "
                  f"{t_prox * 1e3:>11.3f}")


if __name__ == "__main__":
    main()
