"""Design-matrix wrapper and the small linear-algebra toolkit the solvers use.

DesignMatrix hides the dense/sparse split: dense data is kept column-major
(solvers slice columns constantly), sparse data as CSR with sorted indices.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class MaxItersExceeded(RuntimeError):
    """CG ran out of iterations; carries the last iterate and residual."""

    def __init__(self, x, residual, iters):
        super().__init__(
            f"CG did not converge in {iters} iterations (residual {residual:.3e})")
        self.x = x
        self.residual = residual
        self.iters = iters


@dataclass(frozen=True)
class CgControls:
    max_iters: int = 500
    rel_tol: float = 1e-9
    abs_tol: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rel_tol < 0 or self.abs_tol < 0:
            raise ValueError("tolerances must be nonnegative")


class DesignMatrix:
    """m-by-n design matrix, dense (Fortran order) or sparse CSR.

    Requires m >= 1 and n >= 2: with a single column the pairwise penalty
    is vacuous.  All entries must be finite.
    """

    def __init__(self, mat, min_cols: int = 2):
        if sp.issparse(mat):
            raw = sp.csr_matrix(mat, dtype=np.float64)
            raw.sort_indices()
            if raw.nnz and not np.all(np.isfinite(raw.data)):
                raise ValueError("design matrix entries must be finite")
            self._sparse = True
        else:
            raw = np.asfortranarray(mat, dtype=np.float64)
            if raw.ndim != 2:
                raise ValueError("design matrix must be 2-dimensional")
            if not np.all(np.isfinite(raw)):
                raise ValueError("design matrix entries must be finite")
            self._sparse = False
        m, n = raw.shape
        if m < 1:
            raise ValueError("design matrix needs at least one row")
        if n < min_cols:
            raise ValueError(
                f"design matrix needs at least {min_cols} columns, got {n}")
        self.raw = raw
        self.m = m
        self.n = n

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def is_sparse(self) -> bool:
        return self._sparse

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.raw @ np.asarray(v, dtype=np.float64)
        return np.asarray(out).ravel() if self._sparse else out

    def tmatvec(self, v: np.ndarray) -> np.ndarray:
        out = self.raw.T @ np.asarray(v, dtype=np.float64)
        return np.asarray(out).ravel() if self._sparse else out

    def column_submatrix(self, idx) -> "DesignMatrix":
        """Columns at idx, in order, as a new DesignMatrix (may be empty)."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("column index out of range")
        sub = self.raw[:, idx]
        return DesignMatrix(sub, min_cols=0)

    def toarray(self) -> np.ndarray:
        return self.raw.toarray() if self._sparse else np.array(self.raw)

    def gram(self) -> np.ndarray:
        """Dense A^T A; only sensible for moderate n."""
        if self._sparse:
            return np.asarray((self.raw.T @ self.raw).todense())
        return self.raw.T @ self.raw

    def __repr__(self):
        kind = "sparse" if self._sparse else "dense"
        return f"DesignMatrix({self.m}x{self.n}, {kind})"


def cg_solve(apply, rhs: np.ndarray, ctrl: CgControls, x0=None) -> np.ndarray:
    """Conjugate gradients for SPD operators.

    Stops when ||apply(x) - rhs|| <= max(abs_tol, rel_tol * ||rhs||); raises
    MaxItersExceeded (carrying the last iterate) past ctrl.max_iters.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    tol = max(ctrl.abs_tol, ctrl.rel_tol * float(np.linalg.norm(rhs)))
    if x0 is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=np.float64)
        r = rhs - apply(x)
    rr = float(r @ r)
    if np.sqrt(rr) <= tol:
        return x
    p = r.copy()
    for it in range(ctrl.max_iters):
        ap = apply(p)
        alpha = rr / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= tol:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise MaxItersExceeded(x, np.sqrt(rr), ctrl.max_iters)


def smw_solve(d_inv_apply, Uf: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve (D + Uf Uf^T) x = rhs given the action of D^{-1}.

    Sherman-Morrison-Woodbury with the t-by-t core factorized densely;
    t = 0 reduces to x = D^{-1} rhs.
    """
    import scipy.linalg as sla

    rhs = np.asarray(rhs, dtype=np.float64)
    w = d_inv_apply(rhs)
    if Uf is None or Uf.size == 0:
        return w
    Uf = np.asarray(Uf, dtype=np.float64)
    t = Uf.shape[1]
    Z = np.column_stack([d_inv_apply(Uf[:, j]) for j in range(t)])
    S = np.eye(t) + Uf.T @ Z
    try:
        q = sla.solve(S, Uf.T @ w, assume_a="pos")
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"singular {t}x{t} SMW core system") from exc
    return w - Z @ q
