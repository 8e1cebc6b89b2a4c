"""Inference on differences of welfare indices between overlapping samples."""

from .distributions import (
    GaussianCopula,
    SinghMaddala,
    normal_cdf,
    normal_quantile,
    sample_paired,
    sm_cdf,
    sm_quantile,
)
from .indices import (
    DegenerateMeanError,
    DomainError,
    IndexKind,
    InfluenceVector,
    UndefinedIndexError,
    estimate,
    influence,
    kakwani_scale,
    lorenz_vector_influence,
)
from .inference import (
    METHODS,
    BootstrapConfig,
    ConfidenceInterval,
    DegenerateBootstrapError,
    TestResult,
    ci_independent_naive,
    ci_intersection,
    ci_intersection_method,
    ci_overlap_asym,
    ci_overlap_boot,
    ci_per_sample_asym,
    ci_per_sample_boot,
    confidence_interval,
    test_delta,
)
from .kernels import BACKEND
from .variance import (
    DeltaVarianceReport,
    PairedDataset,
    delta_variance,
    delta_variance_matrix,
    delta_variance_naive,
    sample_variance_of_if,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "METHODS",
    "BootstrapConfig",
    "ci_independent_naive",
    "ci_intersection",
    "ci_intersection_method",
    "ci_overlap_asym",
    "ci_overlap_boot",
    "ci_per_sample_asym",
    "ci_per_sample_boot",
    "confidence_interval",
    "ConfidenceInterval",
    "DegenerateBootstrapError",
    "DegenerateMeanError",
    "delta_variance",
    "delta_variance_matrix",
    "delta_variance_naive",
    "DeltaVarianceReport",
    "DomainError",
    "estimate",
    "GaussianCopula",
    "IndexKind",
    "influence",
    "InfluenceVector",
    "kakwani_scale",
    "lorenz_vector_influence",
    "normal_cdf",
    "normal_quantile",
    "PairedDataset",
    "sample_paired",
    "sample_variance_of_if",
    "SinghMaddala",
    "sm_cdf",
    "sm_quantile",
    "test_delta",
    "TestResult",
    "UndefinedIndexError",
    "__version__",
]
