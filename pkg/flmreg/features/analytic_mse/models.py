# flmreg/features/analytic_mse/models.py
"""Population model for the closed-form oracle MSE expansions"""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from flmreg.core.exceptions import DimensionError, DomainError, NumericError
from flmreg.features.fda_core.models import Curve, Grid
from flmreg.features.estimators.models import OracleSplit


class OracleMse(NamedTuple):
    mse: float
    bias2: float
    variance: float


class DominationGap(NamedTuple):
    """MSE(TR oracle) - MSE(HR oracle) = A1/n + rho^2 A2"""
    gap: float
    A1: float
    A2: float


@dataclass(frozen=True, eq=False)
class PopulationModel:
    """A J-component population: X = sum_j xi_j phi_j with Var(xi_j) = lambda_j.

    coeff_kurtosis holds Var(xi_j^2)/lambda_j^2 per component (a scalar is broadcast);
    the expansions assume independent component scores.
    """
    eigvals: np.ndarray
    beta_coeffs: np.ndarray
    sigma2: float
    coeff_kurtosis: Union[float, np.ndarray]
    split_r: int = 0
    eigfuns: Optional[np.ndarray] = None
    grid: Optional[Grid] = None

    def __post_init__(self):
        eigvals = np.array(self.eigvals, dtype=float)
        beta_coeffs = np.array(self.beta_coeffs, dtype=float)
        kurtosis = np.broadcast_to(np.asarray(self.coeff_kurtosis, dtype=float), eigvals.shape).copy()
        if eigvals.ndim != 1 or eigvals.size == 0:
            raise DimensionError("a population model needs at least one eigenvalue")
        if beta_coeffs.shape != eigvals.shape:
            raise DimensionError(f"{beta_coeffs.size} slope coefficients for {eigvals.size} eigenvalues")
        if not (np.all(np.isfinite(eigvals)) and np.all(np.isfinite(beta_coeffs)) and np.all(np.isfinite(kurtosis))):
            raise NumericError("population model contains non-finite values")
        if np.any(eigvals <= 0) or np.any(np.diff(eigvals) >= 0):
            raise DomainError("population eigenvalues must be positive and strictly decreasing")
        if np.any(kurtosis < 0):
            raise DomainError("coefficient kurtosis must be nonnegative")
        if self.sigma2 < 0:
            raise DomainError(f"noise variance must be nonnegative, got {self.sigma2}")
        if self.split_r < 0:
            raise DomainError(f"split_r must be nonnegative, got {self.split_r}")
        if self.eigfuns is not None:
            eigfuns = np.array(self.eigfuns, dtype=float)
            if self.grid is None or eigfuns.shape != (eigvals.size, self.grid.m):
                raise DimensionError("eigenfunctions need a grid and one row per eigenvalue")
            eigfuns.setflags(write=False)
            object.__setattr__(self, "eigfuns", eigfuns)
        for name, array in (("eigvals", eigvals), ("beta_coeffs", beta_coeffs), ("coeff_kurtosis", kurtosis)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @classmethod
    def from_split(
        cls,
        split: OracleSplit,
        beta: Curve,
        sigma2: float,
        coeff_kurtosis: Union[float, np.ndarray],
    ) -> "PopulationModel":
        """Model whose eigenstructure is an oracle split and whose slope is beta"""
        split.grid.require_match(beta.grid)
        coeffs = split.eigfuns @ beta.values / split.grid.m
        return cls(split.eigvals, coeffs, sigma2, coeff_kurtosis, split.r, split.eigfuns, split.grid)

    @property
    def J(self) -> int:
        return int(self.eigvals.size)

    @property
    def beta_energy(self) -> float:
        """<K beta, beta> = sum_j lambda_j b_j^2"""
        return float(np.sum(self.eigvals * self.beta_coeffs ** 2))

    def with_split(self, split_r: int) -> "PopulationModel":
        return PopulationModel(
            self.eigvals, self.beta_coeffs, self.sigma2, self.coeff_kurtosis, split_r, self.eigfuns, self.grid
        )
