"""Derived theory predictions on top of the fixed-point solver.

Covers the outer one-dimensional optimizations (signal alignment alpha*,
penalty lambda*) and the quantities the Monte Carlo lab verifies: limiting
objective, margin-boundary fraction, misclassification probability, and
the predicted CDFs of coefficients and margins.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr

from .gauss import std_normal_pdf
from .models import KIND_NULL, ModelSpec, VQuadrature, v_quadrature
from .state_equations import (
    STATUS_CONVERGED,
    FixedPointSolution,
    solve_null,
    solve_signaled,
)

ALPHA_GRID_STEP = 0.02
ALPHA_MAX_INITIAL = 10.0
ALPHA_REFINE_TOL = 1e-5
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class CalibrationError(RuntimeError):
    pass


def theory_objective(
    alpha: float,
    gamma: float,
    sigma: float,
    model: ModelSpec,
    quad: VQuadrature,
) -> float:
    """Limiting normalized SVM objective at (alpha, gamma, sigma).

    E(1 - f_gamma(alpha V + sigma Z))_+ + lam*delta*(sigma^2 + alpha^2),
    using the closed form E[(1 - f_gamma(W))_+ | V=v]
    = (t - gamma)*Phi((t - gamma)/sigma) + sigma*phi((t - gamma)/sigma)
    with t = 1 - alpha*v.
    """
    if gamma <= 0 or sigma <= 0:
        raise ValueError("theory_objective: gamma and sigma must be > 0")
    t = 1.0 - alpha * quad.nodes
    a = (t - gamma) / sigma
    hinge = float(np.dot(quad.weights, (t - gamma) * ndtr(a) + sigma * std_normal_pdf(a)))
    return hinge + model.lam * model.delta * (sigma * sigma + alpha * alpha)


def misclassification_theory(alpha: float, sigma: float, quad: VQuadrature) -> float:
    """P(alpha*V + sigma*Z < 0) = E_V Phi(-alpha*V/sigma)."""
    if sigma <= 0:
        raise ValueError("misclassification_theory: sigma must be > 0")
    return float(np.dot(quad.weights, ndtr(-alpha * quad.nodes / sigma)))


def support_fraction_theory(solution: FixedPointSolution, model: ModelSpec) -> float:
    """Limiting fraction of samples exactly on the margin boundary."""
    if not solution.converged:
        raise ValueError("support_fraction_theory: solution did not converge")
    return (1.0 - 2.0 * model.lam * solution.gamma) * model.delta


# -- alpha optimization ------------------------------------------------------


def _objective_at(alpha, model, quad, tol, warm):
    sol = solve_signaled(alpha, model, tol=tol, quad=quad, warm=warm)
    if not sol.converged:
        return math.inf, sol
    val = theory_objective(alpha, sol.gamma, sol.sigma, model, quad)
    return val, sol


def optimize_alpha(
    model: ModelSpec,
    tol: float = 1e-10,
    quad: Optional[VQuadrature] = None,
    full_line: bool = False,
) -> FixedPointSolution:
    """Minimize the limiting objective over the signal alignment alpha.

    Coarse grid (step 0.02, warm-started along the scan), then golden-section
    refinement to 1e-5.  alpha is restricted to >= 0 unless full_line is set.
    Grid points where the inner system has no solution are skipped.
    """
    if model.kind == KIND_NULL:
        # alpha* = 0 identically; the signaled system at alpha=0 is the null one
        sol = solve_null(model.delta, model.lam, tol=tol)
        return FixedPointSolution(
            sol.gamma, sol.sigma, sol.residual_norm, sol.iterations, sol.status, 0.0
        )
    if quad is None:
        quad = v_quadrature(model)

    lo = -ALPHA_MAX_INITIAL if full_line else 0.0
    alpha_max = ALPHA_MAX_INITIAL
    while True:
        grid = np.arange(lo, alpha_max + 0.5 * ALPHA_GRID_STEP, ALPHA_GRID_STEP)
        vals = np.full(grid.shape, math.inf)
        warm = None
        for k, a in enumerate(grid):
            val, sol = _objective_at(float(a), model, quad, tol, warm)
            vals[k] = val
            if sol.converged:
                warm = (sol.gamma, sol.sigma)
        if not np.any(np.isfinite(vals)):
            raise CalibrationError("no alpha in the scan admits a solution")
        k_best = int(np.argmin(vals))
        if k_best < len(grid) - 1 or alpha_max >= 1e3:
            break
        alpha_max *= 2.0  # minimum on the boundary: extend the scan

    # golden-section refine on the bracketing cell pair
    a_lo = float(grid[max(k_best - 1, 0)])
    a_hi = float(grid[min(k_best + 1, len(grid) - 1)])
    if a_hi <= a_lo:
        a_hi = a_lo + ALPHA_GRID_STEP

    warm = None

    def f(a):
        nonlocal warm
        val, sol = _objective_at(a, model, quad, tol, warm)
        if sol.converged:
            warm = (sol.gamma, sol.sigma)
        return val

    x1 = a_hi - GOLDEN * (a_hi - a_lo)
    x2 = a_lo + GOLDEN * (a_hi - a_lo)
    f1, f2 = f(x1), f(x2)
    while a_hi - a_lo > ALPHA_REFINE_TOL:
        if f1 <= f2:
            a_hi, x2, f2 = x2, x1, f1
            x1 = a_hi - GOLDEN * (a_hi - a_lo)
            f1 = f(x1)
        else:
            a_lo, x1, f1 = x1, x2, f2
            x2 = a_lo + GOLDEN * (a_hi - a_lo)
            f2 = f(x2)
    alpha_star = 0.5 * (a_lo + a_hi)
    if not full_line and alpha_star < ALPHA_REFINE_TOL and grid[k_best] == 0.0:
        alpha_star = 0.0
    sol = solve_signaled(alpha_star, model, tol=tol, quad=quad, warm=warm)
    if not sol.converged:
        raise CalibrationError(f"inner system unsolvable at alpha*={alpha_star}")
    return sol


# -- report ------------------------------------------------------------------


@dataclass(frozen=True)
class TheoryReport:
    """All asymptotic predictions for one (model, delta, lambda)."""

    model: ModelSpec
    solution: FixedPointSolution
    support_fraction: float
    limiting_objective: float
    misclassification: float
    coef_cdf: Callable[[np.ndarray], np.ndarray]
    margin_cdf: Callable[[np.ndarray], np.ndarray]
    quad: VQuadrature

    @property
    def alpha_star(self) -> float:
        return self.solution.alpha or 0.0

    @property
    def gamma_star(self) -> float:
        return self.solution.gamma

    @property
    def sigma_star(self) -> float:
        return self.solution.sigma

    def margin_atom(self) -> float:
        """Mass of the margin-distribution atom at 1 (= support fraction)."""
        return self.support_fraction

    def w_cdf(self, t):
        """CDF of W = alpha* V + sigma* Z."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        args = (t[:, None] - self.alpha_star * self.quad.nodes[None, :]) / self.sigma_star
        out = ndtr(args) @ self.quad.weights
        return out

    def w_density(self, t):
        """Density of W = alpha* V + sigma* Z."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        args = (t[:, None] - self.alpha_star * self.quad.nodes[None, :]) / self.sigma_star
        return (std_normal_pdf(args) @ self.quad.weights) / self.sigma_star

    def to_dict(self, cdf_grid: Optional[np.ndarray] = None) -> dict:
        doc = {
            "model": self.model.model_string(),
            "delta": self.model.delta,
            "lambda": self.model.lam,
            "alpha_star": self.alpha_star,
            "gamma_star": self.gamma_star,
            "sigma_star": self.sigma_star,
            "support_fraction": self.support_fraction,
            "objective": self.limiting_objective,
            "misclassification": self.misclassification,
            "status": self.solution.status,
            "residual_norm": self.solution.residual_norm,
            "iterations": self.solution.iterations,
        }
        if cdf_grid is not None:
            doc["cdf_x"] = list(np.asarray(cdf_grid, dtype=float))
            doc["coef_cdf"] = list(self.coef_cdf(cdf_grid))
            doc["margin_cdf"] = list(self.margin_cdf(cdf_grid))
        return doc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), sort_keys=True)


def _make_margin_cdf(report_fields):
    alpha, gamma, sigma, quad = report_fields

    def w_cdf(t):
        t = np.asarray(t, dtype=float)
        args = (np.atleast_1d(t)[:, None] - alpha * quad.nodes[None, :]) / sigma
        return ndtr(args) @ quad.weights

    def margin_cdf(x):
        """CDF of f_gamma(W): W+gamma below 1-gamma, atom on [1-gamma,1], W above 1."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        below = w_cdf(x - gamma)
        above = w_cdf(np.maximum(x, 1.0))
        out = np.where(x < 1.0, below, above)
        return out if out.ndim else float(out)

    return margin_cdf


def theory_report(
    model: ModelSpec,
    tol: float = 1e-10,
    quad: Optional[VQuadrature] = None,
    solution: Optional[FixedPointSolution] = None,
) -> TheoryReport:
    """Solve the model's fixed point and assemble every derived prediction."""
    if quad is None:
        quad = v_quadrature(model)
    if solution is None:
        solution = optimize_alpha(model, tol=tol, quad=quad)
    if not solution.converged:
        raise CalibrationError(f"fixed point not converged: {solution.status}")
    alpha = solution.alpha or 0.0
    gamma, sigma = solution.gamma, solution.sigma

    def coef_cdf(x):
        x = np.asarray(x, dtype=float)
        out = ndtr(x / sigma)
        return out if out.ndim else float(out)

    margin_cdf = _make_margin_cdf((alpha, gamma, sigma, quad))
    return TheoryReport(
        model=model,
        solution=solution,
        support_fraction=support_fraction_theory(solution, model),
        limiting_objective=theory_objective(alpha, gamma, sigma, model, quad),
        misclassification=misclassification_theory(alpha, sigma, quad),
        coef_cdf=coef_cdf,
        margin_cdf=margin_cdf,
        quad=quad,
    )


# -- lambda tuning -----------------------------------------------------------


def optimize_lambda(
    delta: float,
    model_family: ModelSpec,
    lambda_range: tuple,
    n_grid: int = 30,
    rel_tol: float = 1e-3,
    tol: float = 1e-10,
):
    """Minimize the predicted misclassification over lambda on a log grid.

    Returns (lambda_star, TheoryReport at lambda_star, scan) where scan is a
    list of (lambda, misclassification) rows.  The null model has a flat
    objective (error = 1/2 for every lambda); the range midpoint is returned
    and the flatness is visible in the scan.
    """
    lo, hi = lambda_range
    if not (0 < lo < hi):
        raise ValueError("optimize_lambda: need 0 < lo < hi")
    model_family = ModelSpec(
        model_family.kind, delta, model_family.lam,
        c=model_family.c, weight=model_family.weight,
    )
    quad = v_quadrature(model_family)

    def error_at(lam):
        m = model_family.with_lambda(lam)
        sol = optimize_alpha(m, tol=tol, quad=quad)
        return misclassification_theory(sol.alpha or 0.0, sol.sigma, quad), sol

    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n_grid))
    scan, failures = [], []
    for lam in grid:
        try:
            err, _ = error_at(float(lam))
        except CalibrationError:
            failures.append(float(lam))
            err = math.nan
        scan.append((float(lam), err))
    finite = [(lam, e) for lam, e in scan if not math.isnan(e)]
    if not finite:
        raise CalibrationError(
            f"no lambda in the range admits a solution; failed at {failures}"
        )
    k_best = int(np.argmin([e for _, e in finite]))
    lam_best = finite[k_best][0]

    # golden section in log lambda around the best grid cell
    idx = [i for i, (lam, e) in enumerate(scan) if lam == lam_best][0]
    l_lo = math.log(scan[max(idx - 1, 0)][0])
    l_hi = math.log(scan[min(idx + 1, len(scan) - 1)][0])
    if l_hi <= l_lo:
        l_hi = l_lo + 1e-9

    def fe(llam):
        try:
            return error_at(math.exp(llam))[0]
        except CalibrationError:
            return math.inf

    x1 = l_hi - GOLDEN * (l_hi - l_lo)
    x2 = l_lo + GOLDEN * (l_hi - l_lo)
    f1, f2 = fe(x1), fe(x2)
    while l_hi - l_lo > rel_tol:
        if f1 <= f2:
            l_hi, x2, f2 = x2, x1, f1
            x1 = l_hi - GOLDEN * (l_hi - l_lo)
            f1 = fe(x1)
        else:
            l_lo, x1, f1 = x1, x2, f2
            x2 = l_lo + GOLDEN * (l_hi - l_lo)
            f2 = fe(x2)
    lambda_star = math.exp(0.5 * (l_lo + l_hi))
    report = theory_report(model_family.with_lambda(lambda_star), tol=tol, quad=quad)
    return lambda_star, report, scan
