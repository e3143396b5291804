"""Copula-based image similarity (CSIM) and baseline quality metrics."""
from ._version import __version__
from .copula import (
    DEFAULT_PATCH_SIZE,
    CopulaVector,
    ImageCopula,
    SimilarityMap,
    compute_ranks,
    copula_distance,
    csim_map,
    csim_score,
    image_copula,
    normalize_ranks,
    patch_copula,
)
from .distort import (
    DistortionSpec,
    add_gaussian_noise,
    adjust_contrast,
    gaussian_blur,
    regional_distort,
)
from .harness import (
    MetricRecord,
    MetricSuite,
    dataset_eval,
    sweep_eval,
    video_eval,
)
from .image import (
    Image,
    PatchGrid,
    as_image,
    extract_patches,
    load_image,
    save_image,
    to_grayscale,
    validate_pair,
)
from .quantile import standard_normal_ppf
from .reference import (
    FsimConfig,
    IssmConfig,
    SsimConfig,
    edge_correlation,
    ehs,
    fsim,
    gradient_magnitude,
    issm,
    phase_congruency,
    ssim,
)

__all__ = [
    "__version__", "DEFAULT_PATCH_SIZE", "CopulaVector", "ImageCopula",
    "SimilarityMap", "compute_ranks", "copula_distance", "csim_map",
    "csim_score", "image_copula", "normalize_ranks", "patch_copula",
    "DistortionSpec", "add_gaussian_noise", "adjust_contrast", "gaussian_blur",
    "regional_distort", "Image", "PatchGrid", "as_image", "extract_patches",
    "load_image", "save_image", "to_grayscale", "validate_pair",
    "standard_normal_ppf", "FsimConfig", "IssmConfig", "SsimConfig",
    "edge_correlation", "ehs", "fsim", "gradient_magnitude", "issm",
    "phase_congruency", "ssim", "MetricRecord", "MetricSuite", "dataset_eval",
    "sweep_eval", "video_eval",
]
