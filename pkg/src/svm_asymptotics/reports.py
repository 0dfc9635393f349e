"""Empirical-vs-theory comparison for one fitted SVM instance.

Produces the quantities the asymptotic formulas predict: KS distances for
the coefficient and margin distributions, the margin-boundary fraction,
held-out misclassification, and the normalized objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .calibration import TheoryReport
from .models import ModelSpec
from .svm import Dataset, SvmFit, count_boundary, generate_test_set

MARGIN_ATOM_BAND = 1e-4  # |L - 1| band excluded from the margin KS distance


def ks_distance(sample: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a CDF."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    d_plus = np.max(np.arange(1, n + 1) / n - f)
    d_minus = np.max(f - np.arange(0, n) / n)
    return float(max(d_plus, d_minus))


def ks_distance_excluding(sample, cdf, lo, hi) -> float:
    """KS distance evaluated only at sample points outside [lo, hi].

    Used for the margin distribution, whose predicted law carries an atom
    at 1: the empirical jump location is compared separately, so the sup is
    taken away from the atom.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    f = np.asarray(cdf(x), dtype=float)
    keep = (x < lo) | (x > hi)
    if not np.any(keep):
        return 0.0
    hi_dev = (np.arange(1, n + 1) / n - f)[keep]
    lo_dev = (f - np.arange(0, n) / n)[keep]
    return float(max(np.max(hi_dev), np.max(lo_dev)))


@dataclass(frozen=True)
class ExperimentReport:
    """Config echo + theory predictions + empirical measurements + deltas."""

    model: str
    delta: float
    lam: float
    n: int
    p: int
    seed: int
    theory: dict
    empirical: dict
    deltas: dict = field(default_factory=dict)
    status: str = "converged"

    def to_dict(self) -> dict:
        return {
            "config": {
                "model": self.model,
                "delta": self.delta,
                "lambda": self.lam,
                "n": self.n,
                "p": self.p,
                "seed": self.seed,
            },
            "theory": self.theory,
            "empirical": self.empirical,
            "deltas": self.deltas,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def empirical_report(
    fit: SvmFit,
    data: Dataset,
    model: ModelSpec,
    n_test: int,
    theory: TheoryReport,
) -> ExperimentReport:
    """Compare one fit against the asymptotic predictions.

    Measures:
      coef_ks            KS of a-hat(j) - alpha* a0(j) against N(0, sigma*^2)
      margin_ks          KS of the margins against the predicted law,
                         excluding the atom band at 1
      boundary_fraction  dual-interior count / n
      test_error         misclassification on n_test fresh points
      objective          normalized primal objective
    """
    if not fit.converged:
        raise ValueError("empirical_report: fit did not converge")
    if len(fit.coefficients) != data.p:
        raise ValueError("empirical_report: fit/dataset dimension mismatch")
    if abs(model.delta - data.p / data.n) > 1e-9:
        raise ValueError("empirical_report: theory delta != p/n of the data")

    alpha = theory.alpha_star
    centered = fit.coefficients - (alpha * data.a0 if data.a0 is not None else 0.0)
    coef_ks = ks_distance(centered, theory.coef_cdf)
    margin_ks = ks_distance_excluding(
        fit.margins, theory.margin_cdf, 1.0 - MARGIN_ATOM_BAND, 1.0 + MARGIN_ATOM_BAND
    )
    boundary_fraction = count_boundary(fit) / data.n

    x_test, y_test = generate_test_set(model, data, n_test)
    test_error = float(
        np.mean(y_test * (x_test @ fit.coefficients) < 0.0)
    )
    objective = fit.primal_objective / data.n

    empirical = {
        "coef_ks": coef_ks,
        "margin_ks": margin_ks,
        "boundary_fraction": boundary_fraction,
        "test_error": test_error,
        "objective": objective,
    }
    deltas = {
        "boundary_fraction": abs(boundary_fraction - theory.support_fraction),
        "test_error": abs(test_error - theory.misclassification),
        "objective": abs(objective - theory.limiting_objective),
    }
    return ExperimentReport(
        model=model.model_string(),
        delta=model.delta,
        lam=model.lam,
        n=data.n,
        p=data.p,
        seed=data.seed,
        theory=theory.to_dict(),
        empirical=empirical,
        deltas=deltas,
        status=fit.status,
    )
