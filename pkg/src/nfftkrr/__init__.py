"""Matrix-free Gaussian ANOVA kernel ridge regression via NFFT fast summation."""

__version__ = "0.1.0"

from .anova import (
    AnovaKernelOperator,
    MisReport,
    WindowSet,
    anova_apply,
    anova_build,
    build_windows,
    mis_scores,
)
from .data import (
    Dataset,
    ScalerStats,
    balance_undersample,
    load_csv,
    split_train_test,
    zscore_apply,
    zscore_fit,
)
from .errors import NumericalError, ShapeError, ValidationError
from .fastsum import (
    FastsumOperator,
    GaussianKernel,
    PeriodizationConfig,
    direct_sum,
    fastsum_apply,
    fastsum_build,
    regularize_kernel,
)
from .krr import (
    KrrConfig,
    KrrModel,
    cg_solve,
    decision_values,
    fit,
    grid_search,
    load_model,
    predict,
    save_model,
)
from .nfft import (
    PROFILES,
    AccuracyProfile,
    GridSpec,
    NfftPlan,
    ndft_adjoint_direct,
    ndft_direct,
    nfft_adjoint,
    nfft_forward,
)
from .oracle import assemble_dense, dense_krr_solve

__all__ = [
    "AccuracyProfile",
    "AnovaKernelOperator",
    "Dataset",
    "FastsumOperator",
    "GaussianKernel",
    "GridSpec",
    "KrrConfig",
    "KrrModel",
    "MisReport",
    "NfftPlan",
    "NumericalError",
    "PROFILES",
    "PeriodizationConfig",
    "ScalerStats",
    "ShapeError",
    "ValidationError",
    "WindowSet",
    "anova_apply",
    "anova_build",
    "assemble_dense",
    "balance_undersample",
    "build_windows",
    "cg_solve",
    "decision_values",
    "dense_krr_solve",
    "direct_sum",
    "fastsum_apply",
    "fastsum_build",
    "fit",
    "grid_search",
    "load_csv",
    "load_model",
    "mis_scores",
    "ndft_adjoint_direct",
    "ndft_direct",
    "nfft_adjoint",
    "nfft_forward",
    "predict",
    "regularize_kernel",
    "save_model",
    "split_train_test",
    "zscore_apply",
    "zscore_fit",
]
