# flmreg/features/bench/__init__.py
"""Benchmark harness: Monte-Carlo studies, rho sweeps, split prediction and result IO"""

from .dao import BenchDAO
from .schemas import (
    ExperimentConfig,
    TuningSpec,
    SweepSpec,
    RhoSweepSpec,
    MseRow,
    MseTable,
    RhoSweepTable,
    PredictionTable,
    OracleMseTable,
    ReplicationRecord,
    ResultDocument,
    ResultMetadata,
)
from .service import BenchService, fit_with_tuning

__all__ = [
    "BenchDAO",
    "BenchService",
    "fit_with_tuning",
    "ExperimentConfig",
    "TuningSpec",
    "SweepSpec",
    "RhoSweepSpec",
    "MseRow",
    "MseTable",
    "RhoSweepTable",
    "PredictionTable",
    "OracleMseTable",
    "ReplicationRecord",
    "ResultDocument",
    "ResultMetadata",
]
