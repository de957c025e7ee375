"""Self-contained numerical kernel: RNG, special functions, regression, tests, KDE."""

from .density import (
    BetaMixture,
    beta_mixture_pdf,
    integrated_squared_loss,
    sample_beta_mixture,
)
from .kde import KdeModel, kde_fit, kde_pdf, select_bandwidth, silverman_bandwidth
from .regression import (
    LinearFit,
    SolverError,
    lasso_fit,
    lasso_objective,
    ols_fit,
    predict,
    r2_score,
)
from .rng import Rng
from .special import incomplete_beta, kolmogorov_sf, normal_cdf, student_t_cdf
from .twosample import TestResult, ks_test, mann_whitney_test, welch_t_test

__all__ = [
    "BetaMixture",
    "KdeModel",
    "LinearFit",
    "Rng",
    "SolverError",
    "TestResult",
    "beta_mixture_pdf",
    "incomplete_beta",
    "integrated_squared_loss",
    "kde_fit",
    "kde_pdf",
    "kolmogorov_sf",
    "ks_test",
    "lasso_fit",
    "lasso_objective",
    "mann_whitney_test",
    "normal_cdf",
    "ols_fit",
    "predict",
    "r2_score",
    "sample_beta_mixture",
    "select_bandwidth",
    "silverman_bandwidth",
    "student_t_cdf",
    "welch_t_test",
]
