# flmreg/features/simgen/schemas.py
"""Simulation design schema"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from flmreg.shared.constants import (
    STUDY_EXPANSION_LENGTH,
    STUDY_GRID_SIZE,
    STUDY_SAMPLE_SIZE,
    BetaChoice,
    GridConvention,
    ScoreDistribution,
    Spacing,
)


class SimDesign(BaseModel):
    """One Karhunen-Loeve simulation design; every field maps onto a config key"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "alpha_decay": 1.1,
                "spacing": "well_spaced",
                "beta_choice": "beta1",
                "n": 100,
                "m": 50,
                "noise_sd": 1.0,
                "seed": 20240101,
            }
        }
    )

    alpha_decay: float = Field(2.0, gt=1, description="eigenvalue decay exponent alpha")
    spacing: Spacing = Spacing.WELL_SPACED
    beta_choice: BetaChoice = BetaChoice.BETA1
    custom_beta: Optional[List[float]] = Field(None, description="slope coefficients for beta_choice=custom")
    n: int = Field(STUDY_SAMPLE_SIZE, ge=2)
    m: int = Field(STUDY_GRID_SIZE, ge=2)
    n_components: int = Field(STUDY_EXPANSION_LENGTH, ge=1, description="expansion length J")
    noise_sd: float = Field(1.0, ge=0)
    measurement_error_sd: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0)
    grid: GridConvention = GridConvention.MIDPOINT
    score_distribution: ScoreDistribution = ScoreDistribution.UNIFORM
    split_r: int = Field(5, ge=0, description="size of the unpenalised block revealed to oracle fits")

    @model_validator(mode="after")
    def _check_custom_beta(self) -> "SimDesign":
        if self.beta_choice == BetaChoice.CUSTOM:
            if not self.custom_beta:
                raise ValueError("beta_choice=custom needs custom_beta coefficients")
            if len(self.custom_beta) > self.n_components:
                raise ValueError(
                    f"{len(self.custom_beta)} custom coefficients exceed n_components={self.n_components}"
                )
        return self
