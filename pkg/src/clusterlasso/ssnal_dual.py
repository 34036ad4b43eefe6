"""Dual augmented-Lagrangian solver with semismooth-Newton inner loops.

Works on the dual formulation

    min_{xi, u}  1/2 ||xi||^2 + <b, xi> + p*(u)   s.t.  A^T xi + u = 0,

driving xi with an inexact Newton method on the (smooth, strongly convex)
augmented-Lagrangian subproblem and recovering the primal iterate through
the prox.  Preferred when m <= n: the Newton systems live in R^m and their
curvature part A M A^T collapses to two thin factors.
"""

import time
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .common import (CONVERGED, MAX_ITERS, MAX_TIME, DualState, SolverConfig,
                     Solution)
from .jacobian import ProxJacobian, build_jacobian, design_factors
from .linalg import CgControls, cg_solve
from .metrics import duality_metrics, eta_kkt
from .problem import ProblemData
from .prox import prox_clustered


class MaxNewtonIters(RuntimeError):
    """Inner Newton loop hit its iteration cap before meeting tolerance."""


def subproblem_value(xi: np.ndarray, x_tilde: np.ndarray, sigma: float,
                     data: ProblemData) -> float:
    """Augmented-Lagrangian dual subproblem objective at xi.

    The conjugate-penalty term vanishes on its domain, leaving
    1/2||xi||^2 + <b,xi> + sigma/2 ||prox_p(x_tilde/sigma - A^T xi)||^2
    - ||x_tilde||^2 / (2 sigma).
    """
    pen = data.require_penalties()
    y = x_tilde / sigma - data.A.tmatvec(xi)
    pv = prox_clustered(y, pen).prox
    return (0.5 * float(xi @ xi) + float(data.b @ xi)
            + 0.5 * sigma * float(pv @ pv)
            - float(x_tilde @ x_tilde) / (2.0 * sigma))


def subproblem_grad(xi: np.ndarray, x_tilde: np.ndarray, sigma: float,
                    data: ProblemData):
    """Gradient xi + b - sigma * A prox_p(x_tilde/sigma - A^T xi); returns (grad, ProxResult)."""
    pen = data.require_penalties()
    y = x_tilde / sigma - data.A.tmatvec(xi)
    pr = prox_clustered(y, pen)
    return xi + data.b - sigma * data.A.matvec(pr.prox), pr


def solve_newton_system(jac: ProxJacobian, A, sigma: float, rhs: np.ndarray,
                        cfg: SolverConfig, counter=None) -> np.ndarray:
    """Solve (I + sigma A M A^T) h = rhs to the inexact-Newton tolerance.

    With the thin factors W = [A_free, A_pooled] the matrix is
    I + sigma W W^T.  Routing: SMW through the k = |free| + pools side when
    k < m (exact, cost m k^2), dense assembly when m is small, CG with the
    structured matvec otherwise (residual target min(eta_bar, ||rhs||^{1+tau})).
    """
    kdim = jac.free_idx.shape[0] + jac.npools
    m = A.m
    if kdim == 0:
        return rhs.copy()
    A_free, A_pooled = design_factors(jac, A)

    if kdim <= cfg.dense_cap and kdim < m:
        W = np.hstack([A_free.toarray(), A_pooled])
        S = W.T @ W
        S[np.diag_indices_from(S)] += 1.0 / sigma
        c, low = sla.cho_factor(S, lower=True)
        q = sla.cho_solve((c, low), W.T @ rhs)
        return rhs - W @ q
    if m <= cfg.dense_cap:
        Af = A_free.toarray()
        V = sigma * (Af @ Af.T)
        if A_pooled.size:
            V += sigma * (A_pooled @ A_pooled.T)
        V[np.diag_indices_from(V)] += 1.0
        c, low = sla.cho_factor(V, lower=True)
        return sla.cho_solve((c, low), rhs)

    target = min(cfg.ssn.eta_bar, float(np.linalg.norm(rhs)) ** (1.0 + cfg.ssn.tau))
    nf = A_free.n

    def apply(v):
        if counter is not None:
            counter[0] += 1
        q = np.concatenate([A_free.tmatvec(v), A_pooled.T @ v])
        return v + sigma * (A_free.matvec(q[:nf]) + A_pooled @ q[nf:])

    ctrl = CgControls(max_iters=cfg.cg.max_iters, rel_tol=0.0, abs_tol=target)
    return cg_solve(apply, rhs, ctrl)


def _ssn(data: ProblemData, x_tilde: np.ndarray, sigma: float,
         xi0: np.ndarray, cfg: SolverConfig, stop, deadline: float):
    """Inner Newton loop; stop(gnorm, pr) decides sufficiency.

    Returns (xi, pr, y, residuals, cg_iters, hit_cap).
    """
    pen = data.require_penalties()
    A, b = data.A, data.b
    ssn = cfg.ssn
    xi = np.array(xi0, dtype=np.float64)
    at_xi = A.tmatvec(xi)
    y = x_tilde / sigma - at_xi
    pr = prox_clustered(y, pen)
    const = -float(x_tilde @ x_tilde) / (2.0 * sigma)
    residuals = []
    cg_counter = [0]
    for j in range(ssn.max_newton):
        g = xi + b - sigma * A.matvec(pr.prox)
        gn = float(np.linalg.norm(g))
        residuals.append(gn)
        if stop(gn, pr) or time.perf_counter() > deadline:
            return xi, pr, y, residuals, cg_counter[0], False
        jac = build_jacobian(pr, pen, cfg.ties_tol)
        h = solve_newton_system(jac, A, sigma, -g, cfg, counter=cg_counter)
        gh = float(g @ h)
        if gh >= 0.0:
            # inexact direction lost descent; fall back to steepest descent
            h = -g
            gh = -gn * gn
        at_h = A.tmatvec(h)
        psi0 = (0.5 * float(xi @ xi) + float(b @ xi)
                + 0.5 * sigma * float(pr.prox @ pr.prox) + const)
        alpha = 1.0
        for _ in range(ssn.max_linesearch):
            xi_t = xi + alpha * h
            y_t = y - alpha * at_h
            pr_t = prox_clustered(y_t, pen)
            psi_t = (0.5 * float(xi_t @ xi_t) + float(b @ xi_t)
                     + 0.5 * sigma * float(pr_t.prox @ pr_t.prox) + const)
            if psi_t <= psi0 + ssn.mu * alpha * gh:
                break
            alpha *= ssn.ls_shrink
        xi, y, pr = xi_t, y_t, pr_t
    g = xi + b - sigma * A.matvec(pr.prox)
    residuals.append(float(np.linalg.norm(g)))
    return xi, pr, y, residuals, cg_counter[0], True


def ssn_solve(x_tilde: np.ndarray, sigma: float, xi0: np.ndarray,
              data: ProblemData, cfg: Optional[SolverConfig] = None,
              tol: float = 1e-8):
    """Minimize the dual subproblem until ||grad|| <= tol.

    Returns (xi, ProxResult, newton_iters); raises MaxNewtonIters when the
    cap is hit first.
    """
    cfg = cfg or SolverConfig()
    xi, pr, _, residuals, _, hit_cap = _ssn(
        data, np.asarray(x_tilde, dtype=np.float64), sigma,
        np.asarray(xi0, dtype=np.float64), cfg,
        stop=lambda gn, _pr: gn <= tol,
        deadline=time.perf_counter() + cfg.max_time)
    if hit_cap:
        raise MaxNewtonIters(
            f"inner Newton cap {cfg.ssn.max_newton} hit (residual {residuals[-1]:.3e})")
    return xi, pr, len(residuals) - 1


def solve(data: ProblemData, cfg: Optional[SolverConfig] = None,
          warm: Optional[DualState] = None) -> Solution:
    """Outer augmented-Lagrangian loop on the dual; returns a Solution.

    Per outer iteration k: inexactly minimize the subproblem in xi (inner
    tolerance combining the summable eps_k rule with the two relative
    rules), then u <- y - prox_p(y) and x <- sigma * prox_p(y) with
    y = x/sigma - A^T xi, then grow sigma.  When the inner loop cannot meet
    its tolerance within the Newton cap, the multiplier update is skipped
    and sigma is shrunk instead of grown (growth stays capped below the
    failed level until the inner loop is comfortable again); this keeps the
    subproblems solvable on badly scaled designs.  Terminates when
    max(eta_gap, eta_d, eta_kkt) <= cfg.tol.
    """
    cfg = cfg or SolverConfig()
    pen = data.require_penalties()
    A, b = data.A, data.b
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time
    norm_b = float(np.linalg.norm(b))
    floor = 1e-13 * (1.0 + norm_b)

    if warm is not None:
        xi = np.array(warm.xi, dtype=np.float64)
        u = np.array(warm.u, dtype=np.float64)
        x = np.array(warm.x, dtype=np.float64)
        sigma = warm.sigma
    else:
        xi = np.zeros(A.m)
        u = np.zeros(A.n)
        x = np.zeros(A.n)
        sigma = cfg.sigma0 if cfg.sigma0 is not None else max(
            1.0, norm_b / np.sqrt(A.m))

    status = MAX_ITERS
    total_newton = 0
    total_cg = 0
    newton_residuals = []
    pobj = dobj = e_gap = e_d = e_kkt = np.inf
    outer = 0
    k = 0  # successful multiplier updates; drives the tolerance sequences
    sigma_ceiling = cfg.sigma_max
    for attempt in range(cfg.max_outer):
        outer = attempt + 1
        eps_k = cfg.eps_k(k)
        delta_k = cfg.delta_k(k)
        deltap_k = cfg.delta_prime_k(k)
        x_over_sigma = x / sigma
        sqrt_sigma = np.sqrt(sigma)

        def stop(gn, pr, _xs=x_over_sigma, _eps=eps_k, _d=delta_k,
                 _dp=deltap_k, _ss=sqrt_sigma):
            if gn <= floor:
                return True
            if gn > _eps / _ss:
                return False
            feas = float(np.linalg.norm(_xs - pr.prox))
            return gn <= min(_d * _ss, _dp) * feas

        xi, pr, y, residuals, ncg, hit_cap = _ssn(data, x, sigma, xi, cfg,
                                                  stop, deadline)
        newton_residuals.append(residuals)
        total_newton += len(residuals) - 1
        total_cg += ncg

        if not hit_cap:
            u = y - pr.prox
            x = sigma * pr.prox
            k += 1

        pobj, dobj, e_gap, e_d = duality_metrics(x, xi, u, data)
        e_kkt = eta_kkt(x, data)
        if max(e_gap, e_d, e_kkt) <= cfg.tol:
            status = CONVERGED
            break
        if time.perf_counter() > deadline:
            status = MAX_TIME
            break

        if hit_cap:
            # The subproblem was too hard at this penalty level: keep the
            # xi progress but drop the multiplier update, cap future growth
            # below the level that failed, and retry with a gentler sigma.
            sigma_ceiling = sigma / 2.0
            sigma = max(cfg.sigma_min, sigma / cfg.sigma_shrink)
            continue
        if len(residuals) - 1 <= 3 and cfg.sigma_growth * sigma > sigma_ceiling:
            # Inner Newton is cruising while pinned at the ceiling; probe a
            # higher penalty level again.
            sigma_ceiling = min(2.0 * sigma_ceiling, cfg.sigma_max)
        sigma = min(cfg.sigma_growth * sigma, sigma_ceiling, cfg.sigma_max)

    return Solution(
        x=x, xi=xi, u=u, pobj=pobj, dobj=dobj, eta_gap=e_gap, eta_d=e_d,
        eta_kkt=e_kkt, status=status, outer_iters=outer,
        total_newton_iters=total_newton, total_cg_iters=total_cg,
        wall_time=time.perf_counter() - t0,
        newton_residuals=newton_residuals)
