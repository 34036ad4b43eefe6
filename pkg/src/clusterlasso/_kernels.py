"""Hot numeric kernels.

The pool-adjacent-violators sweep is an inherently sequential O(n) loop, so
the default build JIT-compiles it with numba.  Setting the environment
variable ``CLUSTERLASSO_NO_NUMBA=1`` before import selects the plain
numpy/Python implementation instead (same function body, interpreted).
``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import os

import numpy as np


def _env_disabled() -> bool:
    val = os.environ.get("CLUSTERLASSO_NO_NUMBA", "")
    return val.strip().lower() in ("1", "true", "yes", "on")


NUMBA_ENABLED = False
if not _env_disabled():
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        pass


def pav_nonincreasing_py(v):
    """Pool-adjacent-violators sweep onto the non-increasing cone.

    Returns ``(sums, counts)`` for the merged blocks, left to right; the
    projection is ``repeat(sums / counts, counts)``.  Blocks merge only on
    strict order violations, so exact ties stay in separate blocks.
    """
    n = v.shape[0]
    sums = np.empty(n, dtype=np.float64)
    counts = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        s = v[i]
        c = 1
        # counts are positive, so the cross-multiplied test is the plain
        # mean comparison mean[top-1] < s/c without the division
        while top > 0 and sums[top - 1] * c < s * counts[top - 1]:
            s += sums[top - 1]
            c += counts[top - 1]
            top -= 1
        sums[top] = s
        counts[top] = c
        top += 1
    return sums[:top].copy(), counts[:top].copy()


if NUMBA_ENABLED:
    pav_nonincreasing = njit(cache=True)(pav_nonincreasing_py)
else:
    pav_nonincreasing = pav_nonincreasing_py


def warmup() -> None:
    """Trigger JIT compilation ahead of any timed section."""
    pav_nonincreasing(np.array([1.0, 3.0, 2.0, 2.0]))
