# flmreg/shared/constants.py
"""Shared constants for the library and the benchmark harness"""

from enum import Enum


class Method(str, Enum):
    """Slope estimators"""
    ST = "ST"
    TR = "TR"
    HR = "HR"
    HR_ORACLE = "HR_oracle"
    TR_ORACLE = "TR_oracle"

    @property
    def is_oracle(self) -> bool:
        return self in (Method.HR_ORACLE, Method.TR_ORACLE)


class SelectionMode(str, Enum):
    """How tuning parameters are chosen in a study"""
    FIXED = "fixed"
    GCV = "gcv"
    KFOLD = "kfold"
    DOUBLE_CV = "double_cv"
    ORACLE_BEST = "oracle_best"


class SelectionRule(str, Enum):
    """How a data-driven criterion surface turns into one grid point"""
    MINIMUM = "min"
    ONE_SE = "one_se"


class Spacing(str, Enum):
    """Eigenvalue geometries of the simulation designs"""
    WELL_SPACED = "well_spaced"
    CLOSELY_SPACED = "closely_spaced"


class BetaChoice(str, Enum):
    """Slope functions of the simulation designs"""
    BETA1 = "beta1"
    BETA2 = "beta2"
    BETA3 = "beta3"
    CUSTOM = "custom"


class GridConvention(str, Enum):
    """Placement of equispaced sampling points in [0, 1]"""
    MIDPOINT = "midpoint"
    ENDPOINT = "endpoint"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class CsvLayout(str, Enum):
    """Supported dataset file layouts"""
    RESPONSE_FIRST = "response_first"
    TWO_FILE = "two_file"


class RhoScale(str, Enum):
    """Whether a rho grid is given in units of the leading eigenvalue"""
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


class ScoreDistribution(str, Enum):
    """Distribution of the standardised principal component scores"""
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    DEGENERATE = "degenerate"


# Numerical tolerances
EIGENVALUE_CLAMP_RATIO = 1e-12
ORTHONORMALITY_TOL = 1e-8
ORACLE_ORTHONORMALITY_TOL = 1e-6
NULLSPACE_RESIDUAL_TOL = 1e-10

# Tuning defaults
DEFAULT_CONDITION_NUMBER = 30.0
DEFAULT_RHO_GRID_SIZE = 40
DEFAULT_RHO_GRID_LOW = 1e-6
DEFAULT_RHO_GRID_HIGH = 10.0
DEFAULT_FOLDS = 10
DEFAULT_ST_MAX_R = 20
DEFAULT_HR_MAX_R = 5
VARIANCE_RULE_FRACTION = 0.85

# Simulation defaults
STUDY_EXPANSION_LENGTH = 50
STUDY_SAMPLE_SIZE = 100
STUDY_GRID_SIZE = 50
STUDY_REPLICATIONS = 1000
UNIFORM_SCORE_HALF_WIDTH = 3.0 ** 0.5
GAUSSIAN_SCORE_KURTOSIS = 2.0

# Random substreams within one replication
STREAM_DATA = 0
STREAM_MEASUREMENT_ERROR = 1
STREAM_TUNING = 2
STREAM_SPLIT = 3

# Result emission
CSV_COLUMNS = ["beta", "alpha", "method", "selection", "mean_mse", "mc_se", "mean_r", "mean_rho"]
