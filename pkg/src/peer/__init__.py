"""Sparse layer-by-layer reduced-rank regression for response matrices with missing cells."""

from ._kernels import BACKEND
from .lasso import LassoFit, LassoOptions, gic_select, lambda_path, lasso_cd
from .linalg import (
    DegenerateInputError,
    InvalidInputError,
    NumericError,
    SvdTriplet,
    cholesky_psd,
    qr_orthonormalize,
    thin_svd,
    truncate_rank,
)
from .masked import ObservedMatrix, column_mean_impute, combine, missing_rate, project_observed
from .metrics import FitScore, estimation_error, prediction_error, selection_rates, summarize
from .model import (
    LayerEstimate,
    PeerModel,
    estimate_rank,
    fit_peer,
    load_model,
    predict,
    rank_threshold,
    save_model,
)
from .simgen import SimDataset, SimScenario, simulate
from .svt import InitEstimate, SvtConfig, full_data_init, svt_initialize

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "LassoFit",
    "LassoOptions",
    "gic_select",
    "lambda_path",
    "lasso_cd",
    "DegenerateInputError",
    "InvalidInputError",
    "NumericError",
    "SvdTriplet",
    "cholesky_psd",
    "qr_orthonormalize",
    "thin_svd",
    "truncate_rank",
    "ObservedMatrix",
    "column_mean_impute",
    "combine",
    "missing_rate",
    "project_observed",
    "FitScore",
    "estimation_error",
    "prediction_error",
    "selection_rates",
    "summarize",
    "LayerEstimate",
    "PeerModel",
    "estimate_rank",
    "fit_peer",
    "load_model",
    "predict",
    "rank_threshold",
    "save_model",
    "SimDataset",
    "SimScenario",
    "simulate",
    "InitEstimate",
    "SvtConfig",
    "full_data_init",
    "svt_initialize",
    "__version__",
]
