# flmreg/core/exceptions.py
"""Custom exceptions for the regression library and benchmark CLI"""

from typing import Optional


class FlmRegException(Exception):
    """Base exception for flmreg"""
    pass


class DimensionError(FlmRegException, ValueError):
    """Raised when curves, estimates or datasets live on different grids"""
    pass


class InsufficientDataError(FlmRegException):
    """Raised when fewer than two observations are available"""
    pass


class NumericError(FlmRegException):
    """Raised on non-finite input or a failed numerical consistency check"""
    pass


class RankError(FlmRegException):
    """Raised when a fit needs more positive eigenvalues than the spectrum has"""
    pass


class DomainError(FlmRegException, ValueError):
    """Raised when a scalar parameter is outside its domain"""
    pass


class SelectionError(FlmRegException):
    """Raised when no grid point of a tuning search has a finite score"""
    pass


class FoldError(FlmRegException):
    """Raised when a cross-validation fold layout is unusable"""
    pass


class ConfigurationError(FlmRegException):
    """Raised when an experiment configuration is invalid"""
    pass


class IngestionError(FlmRegException):
    """Raised when a data file cannot be parsed into a dataset"""

    def __init__(self, message: str, path: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        location = ""
        if path is not None:
            location = path
            if line is not None:
                location += f":{line}"
                if column is not None:
                    location += f":{column}"
            location += ": "
        super().__init__(f"{location}{message}")


class RunError(FlmRegException):
    """Raised when a Monte-Carlo run exceeds its failure budget"""
    pass


class EmissionError(FlmRegException):
    """Raised when results cannot be written"""
    pass
