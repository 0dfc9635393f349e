"""Residuals and root-finding for the soft-margin SVM state equations.

The global-null system couples (gamma, sigma) through truncated normal
moments; the signaled system is the same pair of equations with the
Gaussian shifted by alpha*V, averaged over the V quadrature.  Both are
solved by damped Newton on (log gamma, log sigma), with geometric
continuation in lambda as a fallback for the stiff small-penalty regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .gauss import std_normal_pdf, truncated_moments_arrays
from .models import ModelSpec, VQuadrature, v_quadrature

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
GAMMA_DIVERGED = 1e6
SIGMA_MAX = 1e3
LOG_FLOOR = -34.0  # gamma, sigma floor ~1.7e-15; roots never live below 1/(2*lam)-scale

STATUS_CONVERGED = "converged"
STATUS_DIVERGED = "diverged"
STATUS_MAX_ITER = "max_iter"
STATUS_NO_SOLUTION = "no_solution"


@dataclass(frozen=True)
class FixedPointSolution:
    gamma: float
    sigma: float
    residual_norm: float
    iterations: int
    status: str
    alpha: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


def prox_margin(m: float, gamma: float) -> float:
    """Proximal map of gamma * hinge: min(max(1, m), m + gamma).

    Minimizer of 0.5*(t - m)^2 + gamma*max(0, 1 - t) over t.
    """
    if gamma <= 0:
        raise ValueError("prox_margin: gamma must be > 0")
    return min(max(1.0, m), m + gamma)


def _residuals_nodes(gamma, sigma, delta, lam, t, weights):
    """Core residual pair given per-node margin targets t = 1 - alpha*v."""
    a = (t - gamma) / sigma
    b = t / sigma
    cdf_a = ndtr(a)
    band_lo = float(np.dot(weights, cdf_a))         # P(W <= 1 - gamma)
    outside = band_lo + float(np.dot(weights, 1.0 - ndtr(b)))
    r1 = (2.0 * lam * gamma - 1.0) * delta + 1.0 - outside

    p0, m1, m2 = truncated_moments_arrays(a, b)
    # E[(t - sigma Z)^2 ; a <= Z <= b] expanded in truncated moments
    band = t * t * p0 - 2.0 * t * sigma * m1 + sigma * sigma * m2
    r2 = sigma * sigma * delta / gamma**2 - (
        band_lo + float(np.dot(weights, band)) / gamma**2
    )
    return r1, r2


_NULL_T = np.ones(1)
_NULL_W = np.ones(1)


def null_residuals(gamma: float, sigma: float, delta: float, lam: float):
    """Residuals of the global-null system at (gamma, sigma)."""
    if gamma <= 0 or sigma <= 0:
        raise ValueError("null_residuals: gamma and sigma must be > 0")
    return _residuals_nodes(gamma, sigma, delta, lam, _NULL_T, _NULL_W)


def signaled_residuals(
    gamma: float,
    sigma: float,
    alpha: float,
    model: ModelSpec,
    quad: VQuadrature,
):
    """Residuals of the signaled system at (gamma, sigma) for fixed alpha."""
    if gamma <= 0 or sigma <= 0:
        raise ValueError("signaled_residuals: gamma and sigma must be > 0")
    t = 1.0 - alpha * quad.nodes
    return _residuals_nodes(gamma, sigma, model.delta, model.lam, t, quad.weights)


# -- Newton machinery ------------------------------------------------------


def _newton_logparam(residual_fn, gamma0, sigma0, gamma_cap, tol, max_iter):
    """Damped Newton on (log gamma, log sigma) with FD Jacobian.

    Returns (gamma, sigma, residual_norm, iterations, ok). `ok` is False when
    damping stalls or iterates leave the bracket without converging.
    """
    lg = math.log(min(gamma0, gamma_cap * 0.999999))
    ls = math.log(min(sigma0, SIGMA_MAX * 0.999999))
    rel_step = 1e-6

    def res(lg, ls):
        return np.array(residual_fn(math.exp(lg), math.exp(ls)))

    r = res(lg, ls)
    norm = float(np.max(np.abs(r)))
    for it in range(1, max_iter + 1):
        if norm <= tol:
            return math.exp(lg), math.exp(ls), norm, it - 1, True
        # central differences in log space
        hg = rel_step * max(abs(lg), 1.0)
        hs = rel_step * max(abs(ls), 1.0)
        try:
            j00, j10 = (res(lg + hg, ls) - res(lg - hg, ls)) / (2 * hg)
            j01, j11 = (res(lg, ls + hs) - res(lg, ls - hs)) / (2 * hs)
        except (ValueError, OverflowError):
            return math.exp(lg), math.exp(ls), norm, it, False
        det = j00 * j11 - j01 * j10
        if not math.isfinite(det) or abs(det) < 1e-300:
            return math.exp(lg), math.exp(ls), norm, it, False
        dg = -(j11 * r[0] - j01 * r[1]) / det
        ds = -(-j10 * r[0] + j00 * r[1]) / det
        # damped backtracking on residual max-norm, keeping the bracket
        step = 1.0
        accepted = False
        for _ in range(40):
            lg_t = lg + step * dg
            ls_t = ls + step * ds
            # keep iterates in a range where the residuals stay representable
            if not (LOG_FLOOR < lg_t < 700 and LOG_FLOOR < ls_t < 700):
                step *= 0.5
                continue
            g_t, s_t = math.exp(lg_t), math.exp(ls_t)
            if g_t <= gamma_cap and s_t <= SIGMA_MAX:
                r_t = res(lg_t, ls_t)
                n_t = float(np.max(np.abs(r_t)))
                if math.isfinite(n_t) and n_t < norm:
                    lg, ls, r, norm = lg_t, ls_t, r_t, n_t
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            return math.exp(lg), math.exp(ls), norm, it, False
    return math.exp(lg), math.exp(ls), norm, max_iter, norm <= tol


def _warm_start(delta, lam):
    """Large-penalty expansion: gamma ~ 1/(2 lam), sigma ~ 1/(2 lam sqrt(delta))."""
    return 0.9 / (2.0 * lam), 1.0 / (2.0 * lam * math.sqrt(delta))


def _solve_system(residual_for_lam, delta, lam, tol, max_iter, alpha=None):
    """Newton from the analytic warm start, then lambda-continuation fallback.

    Divergence rule: any gamma iterate beyond GAMMA_DIVERGED (the warm start
    included) ends the solve with status "diverged".  Past that bound the
    second residual scales like sigma^2*delta/gamma^2 < tol, so a root can
    no longer be certified at the requested tolerance anyway.
    """
    gamma_cap = 1.0 / (2.0 * lam)
    g0, s0 = _warm_start(delta, lam)
    if g0 > GAMMA_DIVERGED:
        return FixedPointSolution(g0, s0, math.inf, 0, STATUS_DIVERGED, alpha)
    g, s, norm, its, ok = _newton_logparam(
        residual_for_lam(lam), g0, s0, gamma_cap, tol, max_iter
    )
    total_its = its
    if g > GAMMA_DIVERGED:
        return FixedPointSolution(g, s, norm, total_its, STATUS_DIVERGED, alpha)
    if ok and norm <= tol:
        return FixedPointSolution(g, s, norm, total_its, STATUS_CONVERGED, alpha)

    # continuation: start at an easy penalty and step down geometrically
    lam_k = max(lam, 5.0)
    g, s = _warm_start(delta, lam_k)
    ratio = 0.6
    while True:
        gk, sk, norm, its, ok = _newton_logparam(
            residual_for_lam(lam_k), g, s, 1.0 / (2.0 * lam_k), tol, max_iter
        )
        total_its += its
        if not ok:
            return FixedPointSolution(gk, sk, norm, total_its, STATUS_MAX_ITER, alpha)
        g, s = gk, sk
        if g > GAMMA_DIVERGED:
            return FixedPointSolution(g, s, norm, total_its, STATUS_DIVERGED, alpha)
        if lam_k <= lam:
            return FixedPointSolution(g, s, norm, total_its, STATUS_CONVERGED, alpha)
        lam_k = max(lam, lam_k * ratio)


def solve_null(
    delta: float,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> FixedPointSolution:
    """Solve the global-null system for (gamma*, sigma*).

    Reports status "diverged" when gamma blows past 1e6 along the
    continuation path (the separable small-lambda regime for delta > 0.5).
    """
    if delta <= 0 or lam <= 0:
        raise ValueError("solve_null: delta and lambda must be > 0")

    def residual_for_lam(lam_k):
        return lambda g, s: null_residuals(g, s, delta, lam_k)

    return _solve_system(residual_for_lam, delta, lam, tol, max_iter)


def solve_signaled(
    alpha: float,
    model: ModelSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    quad: Optional[VQuadrature] = None,
    warm: Optional[tuple] = None,
) -> FixedPointSolution:
    """Solve the signaled system for (gamma_alpha, sigma_alpha) at fixed alpha.

    `warm` optionally seeds Newton with a nearby solution (used by the
    alpha scan).  A failed solve is reported with status "no_solution"
    rather than raised; alpha scans skip such points.
    """
    if not math.isfinite(alpha):
        raise ValueError("solve_signaled: alpha must be finite")
    if quad is None:
        quad = v_quadrature(model)
    t = 1.0 - alpha * quad.nodes
    w = quad.weights
    delta, lam = model.delta, model.lam

    def residual_for_lam(lam_k):
        return lambda g, s: _residuals_nodes(g, s, delta, lam_k, t, w)

    if warm is not None:
        g, s, norm, its, ok = _newton_logparam(
            residual_for_lam(lam), warm[0], warm[1], 1.0 / (2.0 * lam), tol, max_iter
        )
        if ok and norm <= tol:
            return FixedPointSolution(g, s, norm, its, STATUS_CONVERGED, alpha)

    sol = _solve_system(residual_for_lam, delta, lam, tol, max_iter, alpha=alpha)
    if sol.status == STATUS_MAX_ITER:
        sol = replace(sol, status=STATUS_NO_SOLUTION)
    return sol
