# flmreg/features/estimators/models.py
"""Value types for fitted slope functions and oracle truth"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from flmreg.core.exceptions import DimensionError, DomainError, NumericError
from flmreg.shared.constants import Method, ORACLE_ORTHONORMALITY_TOL
from flmreg.features.fda_core.models import CovSpectrum, Curve, Grid


@dataclass(frozen=True, eq=False)
class SlopeEstimate:
    """An estimated slope function on the grid plus intercept and fit metadata"""
    beta: Curve
    intercept: float
    method: Method
    r: Optional[int]
    rho: Optional[float]
    df: float
    coefficients: np.ndarray
    tie_warning: bool = False

    def __post_init__(self):
        if not np.isfinite(self.intercept):
            raise NumericError("intercept is not finite")
        if self.rho is not None and self.rho < 0:
            raise DomainError(f"rho must be nonnegative, got {self.rho}")
        if self.r is not None and self.r < 0:
            raise DomainError(f"r must be nonnegative, got {self.r}")

    @property
    def grid(self) -> Grid:
        return self.beta.grid


@dataclass(frozen=True, eq=False)
class OracleSplit:
    """True eigenstructure revealed to the oracle estimators.

    eigfuns (J x m) holds true eigenfunctions row-wise, ordered with the r
    unpenalised components first; eigvals holds the matching true eigenvalues.
    """
    grid: Grid
    r: int
    eigvals: np.ndarray
    eigfuns: np.ndarray

    def __post_init__(self):
        eigvals = np.array(self.eigvals, dtype=float)
        eigfuns = np.array(self.eigfuns, dtype=float).reshape(eigvals.size, -1)
        if eigfuns.shape[1] != self.grid.m:
            raise DimensionError(f"eigenfunctions have {eigfuns.shape[1]} points, grid has m={self.grid.m}")
        if np.any(eigvals < 0):
            raise DomainError("true eigenvalues must be nonnegative")
        if not 0 <= self.r <= eigvals.size:
            raise DomainError(f"split r={self.r} outside 0..{eigvals.size}")
        gram = eigfuns @ eigfuns.T / self.grid.m
        if eigvals.size and np.max(np.abs(gram - np.eye(eigvals.size))) > ORACLE_ORTHONORMALITY_TOL:
            raise NumericError("oracle eigenfunctions are not orthonormal under the grid inner product")
        eigvals.setflags(write=False)
        eigfuns.setflags(write=False)
        object.__setattr__(self, "eigvals", eigvals)
        object.__setattr__(self, "eigfuns", eigfuns)

    @classmethod
    def from_spectrum(cls, spec: CovSpectrum, r: int) -> "OracleSplit":
        """Use an empirical spectrum as if it were the truth"""
        return cls(spec.grid, r, spec.eigvals, spec.eigfuns)

    def with_r(self, r: int) -> "OracleSplit":
        return OracleSplit(self.grid, r, self.eigvals, self.eigfuns)

    @property
    def J(self) -> int:
        return int(self.eigvals.size)

