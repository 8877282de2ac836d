"""Wavelet ridge analysis of modulated multivariate oscillations."""
from .cwt import ScaleGrid, TransformCube, joint_norm, transform, transform_curvature, transform_frequency
from .ellipse import EllipseSnapshot, ellipse_outline, ellipse_params, ellipse_signal, ellipse_trace, snapshot_times
from .errors import (
    EmptyIntervalError,
    GridTooSmallError,
    InvalidGridError,
    InvalidInputError,
    MissingDerivativeError,
    MVRidgeError,
    NonFiniteError,
    NotModulatedError,
    ShapeError,
    UnsupportedOrderError,
)
from .moments import (
    DeviationSet,
    StabilityReport,
    deviation_vectors,
    deviations_from_signal,
    frequency_error_curve,
    joint_frequency,
    projection_identities,
    stability_level,
)
from .morse import MorseWavelet, SuitabilityReport, suitability_check
from .pipeline import PRESETS, PipelineConfig, PipelineResult, run_pipeline, write_outputs
from .ridges import (
    RidgeCurve,
    RidgePoints,
    chain_ridges,
    detect_ridge_points,
    estimate_bias,
    estimate_curvature,
    estimate_frequency,
    estimate_signal,
    evaluate_curve,
    merge_overlaps,
    residual,
    ridge_analysis,
    ridge_scale_diagnostic,
)
from .signal import AnalyticSignal, MultivariateSeries, analytic_signal, polar_decompose, spectral_derivative
from .synth import SyntheticSpec, Truth, float_like_trajectory, generate

__version__ = "0.1.0"
