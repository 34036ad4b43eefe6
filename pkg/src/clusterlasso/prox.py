"""Clustered lasso penalty and its proximal mapping.

The penalty is

    p(x) = beta * ||x||_1 + rho * sum_{i<j} |x_i - x_j|.

Sorting x in non-increasing order turns the pairwise part into an inner
product with the fixed weights w_k = n - 2k + 1, so evaluating p costs one
sort.  The prox factors the same way: project the sorted, weight-shifted
vector onto the non-increasing cone (pool-adjacent-violators), undo the
sort, then soft-threshold.  Total cost O(n log n).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import pav_nonincreasing


@dataclass(frozen=True)
class Penalties:
    """Penalty levels: beta for the l1 part, rho for the pairwise part."""

    beta: float
    rho: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and np.isfinite(self.rho)):
            raise ValueError("penalty levels must be finite")
        if self.beta < 0 or self.rho < 0:
            raise ValueError("penalty levels must be nonnegative")

    def scaled(self, t: float) -> "Penalties":
        if not np.isfinite(t) or t <= 0:
            raise ValueError("scale factor must be positive")
        return Penalties(t * self.beta, t * self.rho)


@dataclass(frozen=True)
class BlockPartition:
    """Constant blocks of a non-increasing projection, left to right.

    start/length index the sorted vector; value holds each block's common
    projected value.  Values are strictly decreasing across blocks.
    """

    start: np.ndarray
    length: np.ndarray
    value: np.ndarray

    @property
    def nblocks(self) -> int:
        return self.start.shape[0]

    def expand(self) -> np.ndarray:
        return np.repeat(self.value, self.length)


@dataclass(frozen=True)
class ProxResult:
    """Prox evaluation plus the sorted structure the Newton code reuses.

    perm maps sorted position -> original index; it is None on the rho = 0
    shortcut path (no sorting performed, partition is None as well).
    theta flags the coordinates where the prox output is nonzero.
    """

    prox: np.ndarray
    s_rho: np.ndarray
    perm: Optional[np.ndarray]
    partition: Optional[BlockPartition]
    theta: np.ndarray
    y_absmax: float


def ordered_weights(n: int) -> np.ndarray:
    """Weights w_k = n - 2k + 1 (1-based k): n-1, n-3, ..., 1-n.

    Strictly decreasing with step 2 and summing to zero; against a sorted
    vector they reproduce the all-pairs absolute-difference sum.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return (n - 1) - 2.0 * np.arange(n)


def soft_threshold(v: np.ndarray, thr: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thr, 0.0)


def penalty_value(x: np.ndarray, pen: Penalties) -> float:
    """Evaluate p(x) in O(n log n); the sort is skipped when rho = 0."""
    x = np.asarray(x, dtype=np.float64)
    val = pen.beta * float(np.sum(np.abs(x))) if pen.beta != 0.0 else 0.0
    if pen.rho != 0.0 and x.size > 1:
        xs = np.sort(x)[::-1]
        val += pen.rho * float(ordered_weights(x.size) @ xs)
    return val


def project_nonincreasing(v: np.ndarray):
    """Euclidean projection onto {x : x_1 >= x_2 >= ... >= x_n}.

    Returns (projection, BlockPartition).  Adjacent blocks that come out of
    the sweep with exactly equal means are coalesced in the partition so
    block values are strictly decreasing; the projection is unchanged.
    """
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    sums, counts = pav_nonincreasing(v)
    means = sums / counts
    if means.size > 1:
        first = np.flatnonzero(np.r_[True, np.diff(means) != 0.0])
        if first.size != means.size:
            counts = np.add.reduceat(counts, first)
            means = means[first]
    starts = np.zeros(counts.size, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    proj = np.repeat(means, counts)
    return proj, BlockPartition(start=starts, length=counts, value=means)


def prox_pairwise(y: np.ndarray, rho: float):
    """Prox of rho * sum_{i<j}|x_i - x_j| at y.

    Returns (s, perm, partition) with s[perm] non-increasing.  The output
    keeps the input's ordering: sort y (stable, descending), shift by
    rho * ordered_weights, project onto the non-increasing cone, unsort.
    For rho = 0 the map is the identity and perm/partition are None.
    """
    y = np.asarray(y, dtype=np.float64)
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if rho == 0.0 or y.size == 1:
        return y.copy(), None, None
    perm = np.argsort(-y, kind="stable")
    shifted = y[perm] - rho * ordered_weights(y.size)
    proj, part = project_nonincreasing(shifted)
    s = np.empty_like(y)
    s[perm] = proj
    return s, perm, part


def prox_clustered(y: np.ndarray, pen: Penalties) -> ProxResult:
    """Prox of the full penalty: soft-threshold the pairwise prox output."""
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise ValueError("y must be nonempty")
    s, perm, part = prox_pairwise(y, pen.rho)
    prox = soft_threshold(s, pen.beta) if pen.beta != 0.0 else s.copy()
    theta = np.abs(s) > pen.beta
    y_absmax = float(np.max(np.abs(y))) if y.size else 0.0
    return ProxResult(prox=prox, s_rho=s, perm=perm, partition=part,
                      theta=theta, y_absmax=y_absmax)


def prox_scaled(y: np.ndarray, t: float, pen: Penalties) -> np.ndarray:
    """Prox of t * p at y, computed with scaled penalty levels.

    Equals t * prox_p(y / t) by positive homogeneity of p; scaling the
    levels instead avoids the divide/multiply round trip.
    """
    if not (np.isfinite(t) and t > 0):
        raise ValueError("t must be positive and finite")
    return prox_clustered(y, pen.scaled(t)).prox


def prox_conjugate(y: np.ndarray, t: float, pen: Penalties) -> np.ndarray:
    """Prox of p*/t at y, i.e. the projection onto dom p*.

    p is positively homogeneous, so p* is the indicator of a closed convex
    set and its prox does not depend on t; by the Moreau identity it is
    y - prox_p(y).
    """
    if not (np.isfinite(t) and t > 0):
        raise ValueError("t must be positive and finite")
    y = np.asarray(y, dtype=np.float64)
    return y - prox_clustered(y, pen).prox
