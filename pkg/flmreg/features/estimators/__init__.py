# flmreg/features/estimators/__init__.py
"""Slope estimators: spectral truncation, Tikhonov, hybrid and their oracle variants"""

from .models import SlopeEstimate, OracleSplit
from .service import (
    split_cross_covariance,
    fit_spectral_truncation,
    fit_tikhonov,
    fit_hybrid,
    fit_hybrid_oracle,
    fit_tikhonov_oracle,
    predict,
    predict_many,
    mse_against_truth,
)

__all__ = [
    "SlopeEstimate",
    "OracleSplit",
    "split_cross_covariance",
    "fit_spectral_truncation",
    "fit_tikhonov",
    "fit_hybrid",
    "fit_hybrid_oracle",
    "fit_tikhonov_oracle",
    "predict",
    "predict_many",
    "mse_against_truth",
]
