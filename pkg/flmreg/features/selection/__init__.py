# flmreg/features/selection/__init__.py
"""Tuning-parameter selection for the slope estimators"""

from .schemas import SelectionResult, SurfacePoint
from .service import (
    condition_indices,
    select_r_condition,
    fit_with_parameters,
    parameter_grid,
    gcv_rho,
    gcv_rank,
    select_hybrid,
    make_folds,
    kfold_cv,
    double_cv,
)

__all__ = [
    "SelectionResult",
    "SurfacePoint",
    "condition_indices",
    "select_r_condition",
    "fit_with_parameters",
    "parameter_grid",
    "gcv_rho",
    "gcv_rank",
    "select_hybrid",
    "make_folds",
    "kfold_cv",
    "double_cv",
]
