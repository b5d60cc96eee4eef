# flmreg/features/analytic_mse/__init__.py
"""Closed-form oracle MSE expansions and the hybrid-versus-Tikhonov gap"""

from .models import PopulationModel, OracleMse, DominationGap
from .schemas import OracleMseCurve, OracleMsePoint
from .service import (
    oracle_tr_mse,
    oracle_hr_mse,
    domination_gap,
    domination_threshold_n,
    oracle_mse_curve,
    uniform_score_kurtosis,
    score_kurtosis,
)

__all__ = [
    "PopulationModel",
    "OracleMse",
    "DominationGap",
    "OracleMseCurve",
    "OracleMsePoint",
    "oracle_tr_mse",
    "oracle_hr_mse",
    "domination_gap",
    "domination_threshold_n",
    "oracle_mse_curve",
    "uniform_score_kurtosis",
    "score_kurtosis",
]
