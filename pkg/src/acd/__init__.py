"""Adaptive Cook's distance for influence diagnostics in high-dimensional regression."""
from ._backend import BACKEND
from .classic import (OlsFit, binary_weight_equivalence_check, cooks_distance,
                      cooks_distance_by_deletion, delete_one, ols, refit_without)
from .core import (GradientMatrix, InfluenceReport, SvdSummary, adaptive_distances,
                   fit_all_local, leading_direction, normalize_and_flag, run_acd)
from .data import (CorrelationSpec, Dataset, StandardizedData, build_sigma, cholesky_sample,
                   standardize)
from .errors import ACDError, ACDWarning, SingularDesignError
from .kernel import WeightVector, estimate_tau, kernel_from_distances, weights_at
from .penalized import (LASSO, SCAD, LocalFit, PenaltySpec, cv_lambda, local_fit,
                        scad_threshold, soft_threshold)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "OlsFit", "binary_weight_equivalence_check", "cooks_distance",
    "cooks_distance_by_deletion", "delete_one", "ols", "refit_without", "GradientMatrix",
    "InfluenceReport", "SvdSummary", "adaptive_distances", "fit_all_local",
    "leading_direction", "normalize_and_flag", "run_acd", "CorrelationSpec", "Dataset",
    "StandardizedData", "build_sigma", "cholesky_sample", "standardize", "ACDError",
    "ACDWarning", "SingularDesignError", "WeightVector", "estimate_tau",
    "kernel_from_distances", "weights_at", "LASSO", "SCAD", "LocalFit", "PenaltySpec",
    "cv_lambda", "local_fit", "scad_threshold", "soft_threshold",
]
