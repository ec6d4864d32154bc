"""Convergence of Gaussian process and kernel ridge regression under
misspecified Matérn kernels, with a Monte-Carlo rate-estimation harness."""

from .designs import Design, grid_design, halton_points
from .kernels import MaternKernel, WendlandKernel, matern_for_smoothness
from .regress import (
    GPSpec,
    NumericalError,
    Observations,
    fit_krr,
    fit_regularized,
    gram_matrix,
    predict,
)
from .harness import ExperimentConfig, run_gp_convergence, run_krr_convergence, run_table2

__version__ = "0.1.0"

__all__ = [
    "Design",
    "grid_design",
    "halton_points",
    "MaternKernel",
    "WendlandKernel",
    "matern_for_smoothness",
    "GPSpec",
    "NumericalError",
    "Observations",
    "fit_krr",
    "fit_regularized",
    "gram_matrix",
    "predict",
    "ExperimentConfig",
    "run_gp_convergence",
    "run_krr_convergence",
    "run_table2",
]
