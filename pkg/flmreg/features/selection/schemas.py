# flmreg/features/selection/schemas.py
"""Pydantic schemas for tuning-parameter selection results"""

import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from flmreg.shared.constants import Method, SelectionRule


class SurfacePoint(BaseModel):
    """One evaluated grid point of a selection criterion"""
    r: int = Field(..., ge=0)
    rho: Optional[float] = Field(None, gt=0)
    score: float
    se: Optional[float] = Field(None, ge=0, description="standard error of the score")


class SelectionResult(BaseModel):
    """Chosen (r, rho) with the full criterion surface it was chosen from"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "method": "HR",
                "criterion": "gcv",
                "rule": "one_se",
                "r": 3,
                "rho": 0.0042,
                "criterion_surface": [{"r": 3, "rho": 0.0042, "score": 1.07, "se": 0.15}],
                "df_at_optimum": 9.8,
                "tolerance": 0.15,
            }
        }
    )

    method: Method
    criterion: str = Field(..., description="gcv, kfold or double_cv")
    rule: SelectionRule = SelectionRule.MINIMUM
    r: int = Field(..., ge=0)
    rho: Optional[float] = Field(None, gt=0)
    criterion_surface: List[SurfacePoint] = Field(..., min_length=1)
    df_at_optimum: float
    tolerance: float = Field(0.0, ge=0, description="allowed excess over the minimum score")

    @model_validator(mode="after")
    def _optimum_in_surface(self) -> "SelectionResult":
        finite = [p.score for p in self.criterion_surface if math.isfinite(p.score)]
        if not finite:
            raise ValueError("criterion surface has no finite score")
        chosen = [p for p in self.criterion_surface if p.r == self.r and p.rho == self.rho]
        if not chosen or not math.isfinite(chosen[0].score):
            raise ValueError("chosen parameters are not a finite point of the surface")
        lowest = min(finite)
        if chosen[0].score > lowest + self.tolerance + 1e-12 * abs(lowest):
            raise ValueError("chosen parameters are not within tolerance of the minimum score")
        return self

    @property
    def best_score(self) -> float:
        return min(p.score for p in self.criterion_surface if p.r == self.r and p.rho == self.rho)

    @property
    def minimum_score(self) -> float:
        return min(p.score for p in self.criterion_surface if math.isfinite(p.score))
