"""Exact proportional-asymptotics calculator for the soft-margin SVM,
with a Monte Carlo verification lab."""

from .calibration import (
    TheoryReport,
    misclassification_theory,
    optimize_alpha,
    optimize_lambda,
    support_fraction_theory,
    theory_objective,
    theory_report,
)
from .gauss import TruncatedMoments, std_normal_cdf, std_normal_pdf, truncated_moments
from .models import ModelSpec, VQuadrature, v_density, v_quadrature
from .reports import ExperimentReport, empirical_report, ks_distance
from .state_equations import (
    FixedPointSolution,
    null_residuals,
    prox_margin,
    signaled_residuals,
    solve_null,
    solve_signaled,
)
from .svm import (
    Dataset,
    SvmFit,
    count_boundary,
    fit_svm,
    generate_dataset,
    generate_test_set,
    load_dataset,
    save_dataset,
)

__all__ = [
    "Dataset",
    "ExperimentReport",
    "FixedPointSolution",
    "ModelSpec",
    "SvmFit",
    "TheoryReport",
    "TruncatedMoments",
    "VQuadrature",
    "count_boundary",
    "empirical_report",
    "fit_svm",
    "generate_dataset",
    "generate_test_set",
    "ks_distance",
    "load_dataset",
    "misclassification_theory",
    "null_residuals",
    "optimize_alpha",
    "optimize_lambda",
    "prox_margin",
    "save_dataset",
    "signaled_residuals",
    "solve_null",
    "solve_signaled",
    "std_normal_cdf",
    "std_normal_pdf",
    "support_fraction_theory",
    "theory_objective",
    "theory_report",
    "truncated_moments",
    "v_density",
    "v_quadrature",
]

__version__ = "0.1.0"
