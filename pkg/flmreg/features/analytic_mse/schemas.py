# flmreg/features/analytic_mse/schemas.py
"""Schemas for analytic oracle MSE tables"""

from typing import List, Optional

from pydantic import BaseModel, Field


class OracleMsePoint(BaseModel):
    """Closed-form oracle MSEs at one rho"""
    rho: float = Field(..., gt=0)
    tr_mse: float
    tr_bias2: float
    tr_variance: float
    hr_mse: float
    hr_bias2: float
    hr_variance: float
    gap: float


class OracleMseCurve(BaseModel):
    """Analytic counterpart of a rho sweep for one design"""
    n: int = Field(..., ge=1)
    split_r: int = Field(..., ge=0)
    J: int = Field(..., ge=1)
    points: List[OracleMsePoint] = Field(default_factory=list)
    threshold_n: Optional[int] = Field(None, description="smallest n with a positive gap at the best TR rho")

    @property
    def best_tr(self) -> Optional[OracleMsePoint]:
        return min(self.points, key=lambda p: p.tr_mse) if self.points else None

    @property
    def best_hr(self) -> Optional[OracleMsePoint]:
        return min(self.points, key=lambda p: p.hr_mse) if self.points else None
