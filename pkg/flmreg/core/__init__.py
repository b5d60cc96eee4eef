# flmreg/core/__init__.py
"""Core infrastructure: exceptions, settings, logging"""

from .config import Settings, get_settings
from .exceptions import (
    FlmRegException,
    DimensionError,
    InsufficientDataError,
    NumericError,
    RankError,
    DomainError,
    SelectionError,
    FoldError,
    ConfigurationError,
    IngestionError,
    RunError,
    EmissionError,
)
from .logging import configure_logging

__all__ = [
    "Settings",
    "get_settings",
    "configure_logging",
    "FlmRegException",
    "DimensionError",
    "InsufficientDataError",
    "NumericError",
    "RankError",
    "DomainError",
    "SelectionError",
    "FoldError",
    "ConfigurationError",
    "IngestionError",
    "RunError",
    "EmissionError",
]
