"""Primal augmented-Lagrangian solver with semismooth-Newton inner loops.

Splits the problem as min 1/2||Ax - b||^2 + p(z) s.t. x - z = 0 and runs the
augmented Lagrangian in x, solving each subproblem by Newton on

    grad(x) = A^T(Ax - b) + (sigma + 1/sigma) x - (y_t + x_t/sigma)
              - prox_p(sigma x - y_t).

The Newton matrix A^T A + sigma (I - M) + I/sigma lives in R^n, so this
route is preferred when m >> n.  Its smallest eigenvalue is at least
1/sigma, so the dense factorization never meets a singular matrix.
"""

import time
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .common import (CONVERGED, MAX_ITERS, MAX_TIME, PrimalState,
                     SolverConfig, Solution)
from .jacobian import ProxJacobian, build_jacobian
from .linalg import CgControls, cg_solve
from .metrics import duality_metrics, eta_kkt
from .problem import ProblemData
from .prox import penalty_value, prox_clustered, prox_conjugate


def subproblem_grad_primal(x: np.ndarray, x_tilde: np.ndarray,
                           y_tilde: np.ndarray, sigma: float,
                           data: ProblemData):
    """Gradient of the primal subproblem at x; returns (grad, ProxResult).

    The ProxResult is taken at sigma * x - y_tilde, the same point whose
    Jacobian feeds the Newton system.
    """
    pen = data.require_penalties()
    pr = prox_clustered(sigma * x - y_tilde, pen)
    g = (data.A.tmatvec(data.A.matvec(x) - data.b)
         + (sigma + 1.0 / sigma) * x - (y_tilde + x_tilde / sigma) - pr.prox)
    return g, pr


def subproblem_value_primal(x: np.ndarray, x_tilde: np.ndarray,
                            y_tilde: np.ndarray, sigma: float,
                            data: ProblemData) -> float:
    """Primal augmented-Lagrangian value at x with z eliminated via the prox."""
    pen = data.require_penalties()
    z = prox_clustered(sigma * x - y_tilde, pen).prox / sigma
    r = data.A.matvec(x) - data.b
    d = x - z
    dx = x - x_tilde
    return (0.5 * float(r @ r) + penalty_value(z, pen)
            - float(y_tilde @ d) + 0.5 * sigma * float(d @ d)
            + float(dx @ dx) / (2.0 * sigma))


def solve_newton_system_primal(jac: ProxJacobian, A, sigma: float,
                               rhs: np.ndarray, cfg: SolverConfig,
                               gram: Optional[np.ndarray] = None,
                               counter=None) -> np.ndarray:
    """Solve (A^T A + sigma (I - M) + I/sigma) h = rhs.

    Dense Cholesky when a cached Gram matrix is available and n is small;
    the dense matrix is assembled directly from the mask/run structure.
    Otherwise CG with the structured matvec.
    """
    n = jac.n
    if gram is not None and n <= cfg.dense_cap:
        U = np.array(gram, dtype=np.float64)
        # add sigma (I - M) diagonally without cancellation: free
        # coordinates get 0, everything else sigma, pools then subtract
        # their sigma/size share
        diag_add = np.full(n, sigma)
        diag_add[jac.free_idx] = 0.0
        U[np.diag_indices_from(U)] += diag_add + 1.0 / sigma
        for t in range(jac.npools):
            lo = jac.pool_offsets[t]
            idx = jac.pool_idx[lo:lo + jac.pool_sizes[t]]
            U[np.ix_(idx, idx)] -= sigma / jac.pool_sizes[t]
        c, low = sla.cho_factor(U, lower=True)
        return sla.cho_solve((c, low), rhs)

    target = min(cfg.ssn.eta_bar, float(np.linalg.norm(rhs)) ** (1.0 + cfg.ssn.tau))

    def apply(v):
        if counter is not None:
            counter[0] += 1
        quad = gram @ v if gram is not None else A.tmatvec(A.matvec(v))
        return quad + sigma * jac.apply_complement(v) + v / sigma

    ctrl = CgControls(max_iters=cfg.cg.max_iters, rel_tol=0.0, abs_tol=target)
    return cg_solve(apply, rhs, ctrl)


def _ssn_primal(data: ProblemData, x_tilde: np.ndarray, y_tilde: np.ndarray,
                sigma: float, cfg: SolverConfig, stop, deadline: float,
                gram: Optional[np.ndarray]):
    """Inner Newton loop on x; stop(gnorm, x, pr) decides sufficiency."""
    pen = data.require_penalties()
    A, b = data.A, data.b
    ssn = cfg.ssn
    x = np.array(x_tilde, dtype=np.float64)
    ax = A.matvec(x)
    pr = prox_clustered(sigma * x - y_tilde, pen)
    shift = y_tilde + x_tilde / sigma
    coef = sigma + 1.0 / sigma
    residuals = []
    cg_counter = [0]

    def value(x_v, ax_v, pr_v):
        z = pr_v.prox / sigma
        r = ax_v - b
        d = x_v - z
        dx = x_v - x_tilde
        return (0.5 * float(r @ r) + penalty_value(z, pen)
                - float(y_tilde @ d) + 0.5 * sigma * float(d @ d)
                + float(dx @ dx) / (2.0 * sigma))

    for j in range(ssn.max_newton):
        g = A.tmatvec(ax - b) + coef * x - shift - pr.prox
        gn = float(np.linalg.norm(g))
        residuals.append(gn)
        if stop(gn, x, pr) or time.perf_counter() > deadline:
            return x, pr, residuals, cg_counter[0], False
        jac = build_jacobian(pr, pen, cfg.ties_tol)
        h = solve_newton_system_primal(jac, A, sigma, -g, cfg, gram,
                                       counter=cg_counter)
        gh = float(g @ h)
        if gh >= 0.0:
            h = -g
            gh = -gn * gn
        ah = A.matvec(h)
        phi0 = value(x, ax, pr)
        alpha = 1.0
        for _ in range(ssn.max_linesearch):
            x_t = x + alpha * h
            ax_t = ax + alpha * ah
            pr_t = prox_clustered(sigma * x_t - y_tilde, pen)
            if value(x_t, ax_t, pr_t) <= phi0 + ssn.mu * alpha * gh:
                break
            alpha *= ssn.ls_shrink
        x, ax, pr = x_t, ax_t, pr_t
    g = A.tmatvec(ax - b) + coef * x - shift - pr.prox
    residuals.append(float(np.linalg.norm(g)))
    return x, pr, residuals, cg_counter[0], True


def solve_primal(data: ProblemData, cfg: Optional[SolverConfig] = None,
                 warm: Optional[PrimalState] = None) -> Solution:
    """Outer augmented-Lagrangian loop on the primal splitting.

    Per outer iteration: Newton-solve for x (inner tolerance proportional
    to the step size, scaled by eps_k / sigma), then
    z <- prox_{p/sigma}(x - y/sigma) and y <- y - sigma (x - z).  For the
    reported optimality measures the dual pair is xi = A z - b and
    u = proj_{dom p*}(-A^T xi).
    """
    cfg = cfg or SolverConfig()
    pen = data.require_penalties()
    A, b = data.A, data.b
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time
    floor = 1e-13 * (1.0 + float(np.linalg.norm(b)))

    if warm is not None:
        x = np.array(warm.x, dtype=np.float64)
        z = np.array(warm.z, dtype=np.float64)
        yv = np.array(warm.y, dtype=np.float64)
        sigma = warm.sigma
    else:
        x = np.zeros(A.n)
        z = np.zeros(A.n)
        yv = np.zeros(A.n)
        sigma = cfg.sigma0 if cfg.sigma0 is not None else max(
            1.0, float(np.linalg.norm(b)) / np.sqrt(A.m))

    gram = None
    if A.n <= cfg.dense_cap and A.m >= 4 * A.n:
        gram = A.gram()

    status = MAX_ITERS
    total_newton = 0
    total_cg = 0
    newton_residuals = []
    pobj = dobj = e_gap = e_d = e_kkt = np.inf
    xi = np.zeros(A.m)
    u = np.zeros(A.n)
    outer = 0
    for k in range(cfg.max_outer):
        outer = k + 1
        eps_k = cfg.eps_k(k)

        def stop(gn, x_c, pr, _x=x, _z=z, _y=yv, _eps=eps_k, _s=sigma):
            if gn <= floor:
                return True
            z_c = pr.prox / _s
            y_c = _y - _s * (x_c - z_c)
            step = np.sqrt(float((x_c - _x) @ (x_c - _x))
                           + float((z_c - _z) @ (z_c - _z))
                           + float((y_c - _y) @ (y_c - _y)))
            return gn <= (_eps / _s) * min(1.0, step)

        x, pr, residuals, ncg, _ = _ssn_primal(data, x, yv, sigma, cfg, stop,
                                               deadline, gram)
        newton_residuals.append(residuals)
        total_newton += len(residuals) - 1
        total_cg += ncg

        z = pr.prox / sigma
        yv = yv - sigma * (x - z)

        xi = A.matvec(z) - b
        u = prox_conjugate(-A.tmatvec(xi), 1.0, pen)
        pobj, dobj, e_gap, e_d = duality_metrics(x, xi, u, data)
        e_kkt = eta_kkt(x, data)
        if max(e_gap, e_d, e_kkt) <= cfg.tol:
            status = CONVERGED
            break
        if time.perf_counter() > deadline:
            status = MAX_TIME
            break
        sigma = min(cfg.sigma_max, cfg.sigma_growth * sigma)

    return Solution(
        x=x, xi=xi, u=u, pobj=pobj, dobj=dobj, eta_gap=e_gap, eta_d=e_d,
        eta_kkt=e_kkt, status=status, outer_iters=outer,
        total_newton_iters=total_newton, total_cg_iters=total_cg,
        wall_time=time.perf_counter() - t0, z=z,
        newton_residuals=newton_residuals)
