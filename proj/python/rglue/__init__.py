"""Robust displacement and strain estimation between RF frames."""

from ._rglue import (
    NumericalError,
    ShapeError,
    SolverParams,
    UndefinedMetric,
    add_gaussian_noise,
    cnr,
    dp_displacement,
    estimate,
    gradients,
    inject_additive_line_outliers,
    inject_multiplicative_outlier,
    least_squares_strain,
    median_filter,
    rglue_refine,
    rmse,
    sample_bilinear,
    snr,
    synthesize_pair,
)

__all__ = [
    "NumericalError",
    "ShapeError",
    "SolverParams",
    "UndefinedMetric",
    "add_gaussian_noise",
    "cnr",
    "dp_displacement",
    "estimate",
    "gradients",
    "inject_additive_line_outliers",
    "inject_multiplicative_outlier",
    "least_squares_strain",
    "median_filter",
    "rglue_refine",
    "rmse",
    "sample_bilinear",
    "snr",
    "synthesize_pair",
]
