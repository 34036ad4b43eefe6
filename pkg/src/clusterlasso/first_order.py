"""First-order baselines: ADMM on either formulation and accelerated
proximal gradient.  These are the reference points the Newton solvers are
benchmarked against; each one only ever touches the prox and plain matvecs.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .common import CONVERGED, MAX_ITERS, MAX_TIME, Solution
from .linalg import CgControls, cg_solve
from .metrics import duality_metrics, eta_kkt, eta_rel, primal_objective
from .problem import ProblemData
from .prox import prox_clustered, prox_conjugate

GOLDEN_LIMIT = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass
class FirstOrderConfig:
    """Shared controls for the baselines.

    tol_metric picks the stopping rule: "kkt" checks the scaled natural-map
    residual against tol, "rel" checks the signed relative objective gap
    against ref_pobj.  variant applies to the dual ADMM only: "exact"
    factorizes I + sigma A A^T once, "inexact" solves it by warm-started CG
    with a summable tolerance min(0.9^k, 0.1 ||rhs||), "linearized" replaces
    the solve with a majorized step of weight lin_tau >= lambda_max(A A^T).
    """

    tol: float = 1e-6
    tol_metric: str = "kkt"
    ref_pobj: Optional[float] = None
    max_iters: int = 20000
    max_time: float = 10800.0
    kappa: float = 1.618
    sigma: float = 1.0
    variant: str = "exact"
    lin_tau: Optional[float] = None
    adaptive_sigma: bool = False
    track_objective: bool = False
    check_every: int = 1
    cg: CgControls = field(default_factory=lambda: CgControls(max_iters=1000))

    def __post_init__(self):
        if not 0 < self.kappa < GOLDEN_LIMIT:
            raise ValueError(
                f"kappa must lie in (0, {GOLDEN_LIMIT:.6f})")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.tol_metric not in ("kkt", "rel"):
            raise ValueError("tol_metric must be 'kkt' or 'rel'")
        if self.variant not in ("exact", "inexact", "linearized"):
            raise ValueError("variant must be exact, inexact or linearized")
        if self.tol_metric == "rel" and self.ref_pobj is None:
            raise ValueError("tol_metric='rel' needs ref_pobj")
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("max_iters and check_every must be >= 1")


def estimate_lipschitz(A, iters: int = 100, seed: int = 0) -> float:
    """Power-iteration estimate of lambda_max(A^T A), padded by 1.01.

    Deterministic for a fixed seed; returns 0.0 for a zero matrix.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.n)
    nv = np.linalg.norm(v)
    if nv == 0.0:  # pragma: no cover - measure zero
        v = np.ones(A.n)
        nv = np.sqrt(A.n)
    v /= nv
    lam = 0.0
    for _ in range(iters):
        w = A.tmatvec(A.matvec(v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        lam = float(v @ w)
        v = w / nw
    return 1.01 * lam


def _finish(x, xi, u, data, status, iters, t0, e_rel, trace, z=None):
    pobj, dobj, e_gap, e_d = duality_metrics(x, xi, u, data)
    return Solution(
        x=x, xi=xi, u=u, pobj=pobj, dobj=dobj, eta_gap=e_gap, eta_d=e_d,
        eta_kkt=eta_kkt(x, data), status=status, outer_iters=iters,
        wall_time=time.perf_counter() - t0, z=z, eta_rel=e_rel,
        obj_trace=trace)


def _converged(cfg, data, x, pobj_cache):
    """Evaluate the configured stopping rule; returns (done, eta_rel_or_None)."""
    if cfg.tol_metric == "rel":
        e = eta_rel(pobj_cache(), cfg.ref_pobj)
        return e <= cfg.tol, e
    return eta_kkt(x, data) <= cfg.tol, None


def d_admm_solve(data: ProblemData, cfg: Optional[FirstOrderConfig] = None,
                 x0: Optional[np.ndarray] = None,
                 u0: Optional[np.ndarray] = None) -> Solution:
    """ADMM on the dual formulation.

    Iterates: solve (I + sigma A A^T) xi = -b + A(x - sigma u), then
    u <- proj_{dom p*}(x/sigma - A^T xi), then the multiplier step
    x <- x - kappa sigma (A^T xi + u).
    """
    cfg = cfg or FirstOrderConfig()
    pen = data.require_penalties()
    A, b = data.A, data.b
    m, n = A.m, A.n
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time
    sigma = cfg.sigma

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    u = np.zeros(n) if u0 is None else np.array(u0, dtype=np.float64)
    xi = np.zeros(m)

    gram_m = None
    lin_tau = None
    if cfg.variant == "exact":
        gram_m = A.raw @ A.raw.T
        if sp.issparse(gram_m):
            gram_m = np.asarray(gram_m.todense())

        def factor(sig):
            V = sig * gram_m
            V[np.diag_indices_from(V)] += 1.0
            return sla.cho_factor(V, lower=True)

        chol = factor(sigma)
    elif cfg.variant == "linearized":
        lin_tau = cfg.lin_tau if cfg.lin_tau is not None else estimate_lipschitz(A)
        if lin_tau <= 0:
            raise ValueError("linearized variant needs lin_tau > 0")

    trace = [] if cfg.track_objective else None
    status = MAX_ITERS
    e_rel = None
    u_prev = u.copy()
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if cfg.variant == "linearized":
            g = A.matvec(A.tmatvec(xi) + u) - A.matvec(x) / sigma
            xi = (sigma * lin_tau * xi - b - sigma * g) / (1.0 + sigma * lin_tau)
        else:
            rhs = -b + A.matvec(x - sigma * u)
            if cfg.variant == "exact":
                xi = sla.cho_solve(chol, rhs)
            else:
                tol_k = min(0.9 ** it, 0.1 * float(np.linalg.norm(rhs)))
                ctrl = CgControls(max_iters=cfg.cg.max_iters, rel_tol=0.0,
                                  abs_tol=max(tol_k, 1e-14))
                xi = cg_solve(
                    lambda v: v + sigma * A.matvec(A.tmatvec(v)), rhs,
                    ctrl, x0=xi)
        at_xi = A.tmatvec(xi)
        v = x / sigma - at_xi
        pr = prox_clustered(v, pen)
        u = v - pr.prox
        x = x - cfg.kappa * sigma * (at_xi + u)

        if cfg.adaptive_sigma and it % 100 == 0 and cfg.variant != "linearized":
            r_feas = float(np.linalg.norm(at_xi + u))
            s_feas = sigma * float(np.linalg.norm(u - u_prev))
            scale = 2.0 if r_feas > 10.0 * s_feas else (
                0.5 if s_feas > 10.0 * r_feas else 1.0)
            if scale != 1.0:
                sigma *= scale
                if cfg.variant == "exact":
                    chol = factor(sigma)
        u_prev = u

        if cfg.track_objective:
            trace.append((it, primal_objective(x, data)))
        if it % cfg.check_every == 0:
            done, e_rel = _converged(cfg, data, x,
                                     lambda: primal_objective(x, data))
            if done:
                status = CONVERGED
                break
        if time.perf_counter() > deadline:
            status = MAX_TIME
            break

    return _finish(x, xi, u, data, status, it, t0, e_rel, trace)


def p_admm_solve(data: ProblemData, cfg: Optional[FirstOrderConfig] = None,
                 z0: Optional[np.ndarray] = None,
                 y0: Optional[np.ndarray] = None) -> Solution:
    """ADMM on the primal splitting x - z = 0.

    Iterates: solve (sigma I + A^T A) x = A^T b + sigma z + y, then
    z <- prox_{p/sigma}(x - y/sigma), then y <- y - kappa sigma (x - z).
    """
    cfg = cfg or FirstOrderConfig()
    pen = data.require_penalties()
    A, b = data.A, data.b
    n = A.n
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time
    sigma = cfg.sigma

    z = np.zeros(n) if z0 is None else np.array(z0, dtype=np.float64)
    yv = np.zeros(n) if y0 is None else np.array(y0, dtype=np.float64)

    gram = np.array(A.gram(), dtype=np.float64)
    atb = A.tmatvec(b)

    def factor(sig):
        G = gram.copy()
        G[np.diag_indices_from(G)] += sig
        return sla.cho_factor(G, lower=True)

    chol = factor(sigma)

    trace = [] if cfg.track_objective else None
    status = MAX_ITERS
    e_rel = None
    x = np.zeros(n)
    z_prev = z.copy()
    it = 0
    for it in range(1, cfg.max_iters + 1):
        x = sla.cho_solve(chol, atb + sigma * z + yv)
        pr = prox_clustered(sigma * x - yv, pen)
        z = pr.prox / sigma
        yv = yv - cfg.kappa * sigma * (x - z)

        if cfg.adaptive_sigma and it % 100 == 0:
            r_feas = float(np.linalg.norm(x - z))
            s_feas = sigma * float(np.linalg.norm(z - z_prev))
            scale = 2.0 if r_feas > 10.0 * s_feas else (
                0.5 if s_feas > 10.0 * r_feas else 1.0)
            if scale != 1.0:
                sigma *= scale
                chol = factor(sigma)
        z_prev = z

        if cfg.track_objective:
            trace.append((it, primal_objective(x, data)))
        if it % cfg.check_every == 0:
            done, e_rel = _converged(cfg, data, x,
                                     lambda: primal_objective(x, data))
            if done:
                status = CONVERGED
                break
        if time.perf_counter() > deadline:
            status = MAX_TIME
            break

    xi = A.matvec(z) - b
    u = prox_conjugate(-A.tmatvec(xi), 1.0, pen)
    return _finish(x, xi, u, data, status, it, t0, e_rel, trace, z=z)


def apg_solve(data: ProblemData, cfg: Optional[FirstOrderConfig] = None,
              x0: Optional[np.ndarray] = None,
              lipschitz: Optional[float] = None) -> Solution:
    """Accelerated proximal gradient with the usual momentum sequence
    t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2."""
    cfg = cfg or FirstOrderConfig()
    pen = data.require_penalties()
    A, b = data.A, data.b
    n = A.n
    t0 = time.perf_counter()
    deadline = t0 + cfg.max_time

    L = lipschitz if lipschitz is not None else estimate_lipschitz(A)
    if L <= 0:
        raise ValueError("need a positive Lipschitz estimate (zero matrix?)")

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    w = x.copy()
    t = 1.0

    trace = [] if cfg.track_objective else None
    status = MAX_ITERS
    e_rel = None
    it = 0
    for it in range(1, cfg.max_iters + 1):
        grad = A.tmatvec(A.matvec(w) - b)
        # prox_{p/L}(w - grad/L) = prox_p(L w - grad) / L by homogeneity
        pr = prox_clustered(L * w - grad, pen)
        x_new = pr.prox / L
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        w = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, t = x_new, t_new

        if cfg.track_objective:
            trace.append((it, primal_objective(x, data)))
        if it % cfg.check_every == 0:
            done, e_rel = _converged(cfg, data, x,
                                     lambda: primal_objective(x, data))
            if done:
                status = CONVERGED
                break
        if time.perf_counter() > deadline:
            status = MAX_TIME
            break

    xi = A.matvec(x) - b
    u = prox_conjugate(-A.tmatvec(xi), 1.0, pen)
    return _finish(x, xi, u, data, status, it, t0, e_rel, trace)
