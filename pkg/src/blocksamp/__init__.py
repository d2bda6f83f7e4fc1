"""Block-sampling inference for the mean of long-memory subordinated linear processes."""

from .blocks import (
    BACKWARD,
    FORWARD,
    EmpiricalDist,
    block_sums,
    centered_block_sums,
    f_n,
    f_n_tilde,
    quantile,
    variance_hat,
    variance_tilde,
)
from .errors import (
    BlockSamplingError,
    ConfigError,
    DegenerateScaleError,
    InsufficientPastError,
    QuadratureError,
    ResourceLimitError,
    SeriesTooShortError,
    TruncationError,
    UnsupportedBoundaryError,
)
from .harness import (
    CoverageReport,
    ExperimentConfig,
    load_config,
    parse_config,
    run_coverage,
    run_single,
    sweep,
)
from .oracle import HermiteSpec, exact_norm_sq, ks_distance, sample_limit, volterra_sum, zeta
from .process import (
    CoefficientSeq,
    InnovationSpec,
    ModelSpec,
    SeriesWindow,
    TransformSpec,
    preset_model,
    simulate_window,
    true_mean,
)
from .scales import ConfidenceInterval, ScaleEstimates, ci_mean, estimate_scales, theoretical_H
from .subsample import SubsampleScales, choose_scales, ci_mean_subsample, f_l_star, local_variance

__all__ = [
    "BACKWARD", "FORWARD", "EmpiricalDist", "block_sums", "centered_block_sums", "f_n",
    "f_n_tilde", "quantile", "variance_hat", "variance_tilde",
    "BlockSamplingError", "ConfigError", "DegenerateScaleError", "InsufficientPastError",
    "QuadratureError", "ResourceLimitError", "SeriesTooShortError", "TruncationError",
    "UnsupportedBoundaryError",
    "CoverageReport", "ExperimentConfig", "load_config", "parse_config", "run_coverage",
    "run_single", "sweep",
    "HermiteSpec", "exact_norm_sq", "ks_distance", "sample_limit", "volterra_sum", "zeta",
    "CoefficientSeq", "InnovationSpec", "ModelSpec", "SeriesWindow", "TransformSpec",
    "preset_model", "simulate_window", "true_mean",
    "ConfidenceInterval", "ScaleEstimates", "ci_mean", "estimate_scales", "theoretical_H",
    "SubsampleScales", "choose_scales", "ci_mean_subsample", "f_l_star", "local_variance",
]
