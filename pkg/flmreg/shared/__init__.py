# flmreg/shared/__init__.py
"""Shared utilities and constants used across features"""

from .utils import (
    log_grid,
    default_rho_grid,
    substream,
    derived_seed,
    argmin_with_ties,
    mc_standard_error,
    format_execution_time,
)
from .constants import (
    Method,
    SelectionMode,
    SelectionRule,
    Spacing,
    BetaChoice,
    GridConvention,
    OutputFormat,
    CsvLayout,
    RhoScale,
    ScoreDistribution,
)

__all__ = [
    "log_grid",
    "default_rho_grid",
    "substream",
    "derived_seed",
    "argmin_with_ties",
    "mc_standard_error",
    "format_execution_time",
    "Method",
    "SelectionMode",
    "SelectionRule",
    "Spacing",
    "BetaChoice",
    "GridConvention",
    "OutputFormat",
    "CsvLayout",
    "RhoScale",
    "ScoreDistribution",
]
