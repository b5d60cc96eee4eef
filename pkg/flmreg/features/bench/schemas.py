# flmreg/features/bench/schemas.py
"""Experiment configuration and result table schemas"""

from typing import ClassVar, Dict, List, Optional, Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from flmreg.shared.constants import (
    CSV_COLUMNS,
    DEFAULT_CONDITION_NUMBER,
    DEFAULT_FOLDS,
    DEFAULT_HR_MAX_R,
    DEFAULT_RHO_GRID_HIGH,
    DEFAULT_RHO_GRID_LOW,
    DEFAULT_RHO_GRID_SIZE,
    DEFAULT_ST_MAX_R,
    STUDY_REPLICATIONS,
    BetaChoice,
    CsvLayout,
    Method,
    OutputFormat,
    RhoScale,
    SelectionMode,
    SelectionRule,
)
from flmreg.shared.utils import log_grid
from flmreg.features.simgen.schemas import SimDesign


# Configuration schemas
def default_mode(method: Method) -> SelectionMode:
    """Selection mode a method gets when the config names only the method"""
    if method.is_oracle:
        return SelectionMode.ORACLE_BEST
    # joint (r, rho) cross-validation; condition-index r stays available as "gcv"
    return SelectionMode.DOUBLE_CV if method == Method.HR else SelectionMode.GCV


class TuningSpec(BaseModel):
    """One (method, selection mode) cell of a study with its search grids"""
    method: Method
    mode: Optional[SelectionMode] = Field(None, description="empty means the method default")
    r_values: List[int] = Field(default_factory=list, description="empty means the method default")
    rho_grid: List[float] = Field(default_factory=list, description="empty means 40 log-spaced points")
    rho_scale: RhoScale = RhoScale.RELATIVE
    folds: int = Field(DEFAULT_FOLDS, ge=2)
    condition_number: float = Field(DEFAULT_CONDITION_NUMBER, ge=1)
    rule: SelectionRule = Field(SelectionRule.ONE_SE, description="min or one_se for data-driven modes")

    @field_validator("r_values")
    @classmethod
    def _nonnegative_r(cls, values: List[int]) -> List[int]:
        if any(r < 0 for r in values):
            raise ValueError("r values must be nonnegative")
        return values

    @field_validator("rho_grid")
    @classmethod
    def _positive_rho(cls, values: List[float]) -> List[float]:
        if any(not rho > 0 for rho in values):
            raise ValueError("rho values must be positive")
        return values

    @model_validator(mode="after")
    def _check_mode(self) -> "TuningSpec":
        if self.mode is None:
            self.mode = default_mode(self.method)
        if self.method.is_oracle and self.mode not in (SelectionMode.FIXED, SelectionMode.ORACLE_BEST):
            raise ValueError(f"{self.method.value} supports only fixed and oracle_best selection")
        if self.method == Method.ST and any(r < 1 for r in self.r_values):
            raise ValueError("spectral truncation needs r >= 1")
        return self

    @property
    def label(self) -> str:
        return self.mode.value

    def resolved_r_values(self) -> List[int]:
        if self.r_values:
            return list(self.r_values)
        if self.method == Method.ST:
            return list(range(1, DEFAULT_ST_MAX_R + 1))
        if self.method in (Method.HR, Method.HR_ORACLE):
            return list(range(1, DEFAULT_HR_MAX_R + 1))
        return [0]

    def rho_values(self, unit: float) -> np.ndarray:
        """Rho grid in absolute units; relative grids are multiplied by unit"""
        grid = np.asarray(self.rho_grid, dtype=float) if self.rho_grid else log_grid(
            DEFAULT_RHO_GRID_LOW, DEFAULT_RHO_GRID_HIGH, DEFAULT_RHO_GRID_SIZE
        )
        return grid * unit if self.rho_scale == RhoScale.RELATIVE else grid


class SweepSpec(BaseModel):
    """Expands one design into a block of designs"""
    beta_choices: List[BetaChoice] = Field(default_factory=list)
    alphas: List[float] = Field(default_factory=list)

    @field_validator("alphas")
    @classmethod
    def _alpha_above_one(cls, values: List[float]) -> List[float]:
        if any(not a > 1 for a in values):
            raise ValueError("alpha values must exceed 1")
        return values


class RhoSweepSpec(BaseModel):
    """Grids for the MSE-versus-rho curves; r = 0 is the Tikhonov curve"""
    r_values: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4, 5])
    rho_grid: List[float] = Field(default_factory=list)
    rho_scale: RhoScale = RhoScale.RELATIVE

    def tuning(self) -> TuningSpec:
        return TuningSpec(method=Method.HR, mode=SelectionMode.ORACLE_BEST, r_values=self.r_values,
                          rho_grid=self.rho_grid, rho_scale=self.rho_scale)


class ExperimentConfig(BaseModel):
    """A complete experiment; every key maps one-to-one onto a JSON config document"""
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "design": {"alpha_decay": 1.1, "spacing": "well_spaced", "n": 100, "m": 50},
                "sweep": {"beta_choices": ["beta1", "beta2", "beta3"], "alphas": [1.1, 2.0]},
                "tuning": [
                    {"method": "ST", "mode": "gcv"},
                    {"method": "TR", "mode": "gcv"},
                    {"method": "HR", "mode": "double_cv"},
                    {"method": "HR", "mode": "oracle_best"},
                ],
                "replications": 1000,
                "seed": 1,
                "format": "csv",
            }
        }
    )

    design: Optional[SimDesign] = None
    sweep: Optional[SweepSpec] = None
    data_file: Optional[str] = None
    response_file: Optional[str] = Field(None, description="y file for the two_file layout")
    layout: CsvLayout = CsvLayout.RESPONSE_FIRST
    methods: List[Method] = Field(default_factory=list)
    tuning: List[TuningSpec] = Field(default_factory=list)
    rho_sweep: RhoSweepSpec = Field(default_factory=RhoSweepSpec)
    replications: int = Field(STUDY_REPLICATIONS, ge=1)
    seed: int = Field(0, ge=0)
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    workers: Optional[int] = Field(None, ge=1)
    failure_budget: Optional[float] = Field(None, ge=0.0, le=1.0)
    dump_replications: bool = False
    splits: int = Field(STUDY_REPLICATIONS, ge=1)
    train_frac: float = Field(0.5, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _fill_tuning(self) -> "ExperimentConfig":
        if not self.tuning:
            self.tuning = [TuningSpec(method=m) for m in self.methods]
        if not self.tuning:
            raise ValueError("at least one method is required")
        return self

    def designs(self) -> List[SimDesign]:
        """The design, or one design per (beta, alpha) of the sweep; all carry the run seed"""
        base = self.design or SimDesign()
        betas = (self.sweep.beta_choices if self.sweep else None) or [base.beta_choice]
        alphas = (self.sweep.alphas if self.sweep else None) or [base.alpha_decay]
        return [
            base.model_copy(update={"beta_choice": beta, "alpha_decay": alpha, "seed": self.seed})
            for beta in betas
            for alpha in alphas
        ]


# Result schemas
class MseRow(BaseModel):
    """One cell of a Monte-Carlo MSE table"""
    beta: str
    alpha: float
    method: str
    selection: str
    mean_mse: float
    mc_se: float
    mean_r: float
    mean_rho: float
    failures: int = 0


class ReplicationRecord(BaseModel):
    """Per-replication value behind a table cell"""
    beta: str
    alpha: float
    method: str
    selection: str
    replication: int
    mse: float
    r: int
    rho: float

    columns: ClassVar[List[str]] = ["beta", "alpha", "method", "selection", "replication", "mse", "r", "rho"]


class MseTable(BaseModel):
    rows: List[MseRow] = Field(default_factory=list)
    replications: int = 0
    failures: int = 0
    replication_records: List[ReplicationRecord] = Field(default_factory=list, exclude=True)

    columns: ClassVar[List[str]] = CSV_COLUMNS

    def records(self) -> List[Dict[str, Any]]:
        return [row.model_dump() for row in self.rows]

    def row(self, beta: str, alpha: float, method: str, selection: str) -> MseRow:
        for candidate in self.rows:
            if (candidate.beta, candidate.alpha, candidate.method, candidate.selection) == (beta, alpha, method, selection):
                return candidate
        raise KeyError(f"no row for {(beta, alpha, method, selection)}")


class SweepPoint(BaseModel):
    """MC-mean MSE at one (r, rho); r = 0 is Tikhonov"""
    beta: str
    alpha: float
    method: str
    r: int
    rho: float
    mean_mse: float
    mc_se: float
    is_minimum: bool = False


class SweepRatio(BaseModel):
    """Best Tikhonov MSE over best hybrid MSE for one design"""
    beta: str
    alpha: float
    min_tr: Optional[float] = None
    min_hr: Optional[float] = None
    ratio: Optional[float] = None


class RhoSweepTable(BaseModel):
    rows: List[SweepPoint] = Field(default_factory=list)
    ratios: List[SweepRatio] = Field(default_factory=list)
    replications: int = 0
    failures: int = 0
    replication_records: List[ReplicationRecord] = Field(default_factory=list, exclude=True)

    columns: ClassVar[List[str]] = ["beta", "alpha", "method", "r", "rho", "mean_mse", "mc_se", "is_minimum"]

    def records(self) -> List[Dict[str, Any]]:
        return [row.model_dump() for row in self.rows]

    def curve(self, r: int) -> List[SweepPoint]:
        return [p for p in self.rows if p.r == r]


class PredictionRow(BaseModel):
    """Mean test-set squared prediction error of one method over random splits"""
    method: str
    selection: str
    mean_error: float
    mc_se: float
    mean_r: float
    mean_rho: float
    splits: int
    failures: int = 0


class PredictionTable(BaseModel):
    rows: List[PredictionRow] = Field(default_factory=list)
    n: int = 0
    train_size: int = 0
    failures: int = 0
    replication_records: List[ReplicationRecord] = Field(default_factory=list, exclude=True)

    columns: ClassVar[List[str]] = ["method", "selection", "mean_error", "mc_se", "mean_r", "mean_rho", "splits"]

    def records(self) -> List[Dict[str, Any]]:
        return [row.model_dump() for row in self.rows]


class FitSummary(BaseModel):
    """A single fitted slope function"""
    method: str
    selection: str
    r: int
    rho: float
    df: float
    intercept: float
    grid: List[float]
    beta: List[float]
    tie_warning: bool = False

    columns: ClassVar[List[str]] = ["t", "beta"]

    def records(self) -> List[Dict[str, Any]]:
        return [{"t": t, "beta": b} for t, b in zip(self.grid, self.beta)]


class ResultMetadata(BaseModel):
    """Run context echoed into JSON results"""
    version: str
    command: str
    seed: int
    replications: Optional[int] = None
    workers: int = 1
    failures: int = 0
    wall_time_ms: float
    wall_time: str
    config: Dict[str, Any] = Field(default_factory=dict)
    summary: Dict[str, Any] = Field(default_factory=dict)


class ResultDocument(BaseModel):
    metadata: ResultMetadata
    records: List[Dict[str, Any]] = Field(default_factory=list)


class OracleMseRecord(BaseModel):
    """Closed-form oracle MSEs of one design at one rho"""
    beta: str
    alpha: float
    n: int
    split_r: int
    rho: float
    tr_mse: float
    tr_bias2: float
    tr_variance: float
    hr_mse: float
    hr_bias2: float
    hr_variance: float
    gap: float
    threshold_n: Optional[int] = None


class OracleMseTable(BaseModel):
    rows: List[OracleMseRecord] = Field(default_factory=list)

    columns: ClassVar[List[str]] = [
        "beta", "alpha", "n", "split_r", "rho", "tr_mse", "tr_bias2", "tr_variance",
        "hr_mse", "hr_bias2", "hr_variance", "gap", "threshold_n",
    ]

    def records(self) -> List[Dict[str, Any]]:
        return [row.model_dump() for row in self.rows]
