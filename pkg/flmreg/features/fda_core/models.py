# flmreg/features/fda_core/models.py
"""Immutable value types for discretely sampled curves"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from flmreg.core.exceptions import DimensionError, InsufficientDataError, NumericError
from flmreg.shared.constants import GridConvention


def _frozen_array(values, name: str) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{name} contains non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered sampling points t_1 < ... < t_m in [0, 1] with quadrature weight 1/m"""
    points: np.ndarray
    convention: Optional[GridConvention] = None

    def __post_init__(self):
        points = _frozen_array(self.points, "grid points")
        if points.ndim != 1 or points.size < 2:
            raise DimensionError(f"a grid needs at least 2 points, got shape {points.shape}")
        if np.any(np.diff(points) <= 0):
            raise DimensionError("grid points must be strictly increasing")
        if points[0] < 0.0 or points[-1] > 1.0:
            raise DimensionError("grid points must lie in [0, 1]")
        object.__setattr__(self, "points", points)

    @classmethod
    def midpoint(cls, m: int) -> "Grid":
        """t_p = (p - 0.5)/m"""
        return cls((np.arange(1, m + 1) - 0.5) / m, GridConvention.MIDPOINT)

    @classmethod
    def endpoint(cls, m: int) -> "Grid":
        """t_p = (p - 1)/(m - 1)"""
        return cls(np.linspace(0.0, 1.0, m), GridConvention.ENDPOINT)

    @classmethod
    def equispaced(cls, m: int, convention: GridConvention = GridConvention.MIDPOINT) -> "Grid":
        if convention == GridConvention.ENDPOINT:
            return cls.endpoint(m)
        return cls.midpoint(m)

    @property
    def m(self) -> int:
        return int(self.points.size)

    def matches(self, other: "Grid") -> bool:
        return self is other or (self.m == other.m and np.array_equal(self.points, other.points))

    def require_match(self, other: "Grid") -> None:
        if not self.matches(other):
            raise DimensionError(f"grid mismatch: m={self.m} vs m={other.m}")


@dataclass(frozen=True, eq=False)
class Curve:
    """Values of one function at the points of a grid"""
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        values = _frozen_array(self.values, "curve values")
        if values.shape != (self.grid.m,):
            raise DimensionError(f"curve has shape {values.shape}, grid has m={self.grid.m}")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid) -> "Curve":
        return cls(np.zeros(grid.m), grid)

    def __add__(self, other: "Curve") -> "Curve":
        self.grid.require_match(other.grid)
        return Curve(self.values + other.values, self.grid)

    def __sub__(self, other: "Curve") -> "Curve":
        self.grid.require_match(other.grid)
        return Curve(self.values - other.values, self.grid)

    def scaled(self, factor: float) -> "Curve":
        return Curve(factor * self.values, self.grid)


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """n scalar responses paired with n curves on one shared grid.

    Curves are stored row-wise in X (n x m); ``curves`` gives Curve views.
    """
    grid: Grid
    y: np.ndarray
    X: np.ndarray

    def __post_init__(self):
        y = _frozen_array(self.y, "responses")
        X = _frozen_array(self.X, "curves")
        if y.ndim != 1:
            raise DimensionError(f"responses must be a vector, got shape {y.shape}")
        if X.ndim != 2 or X.shape[0] != y.size:
            raise DimensionError(f"curve matrix has shape {X.shape}, expected ({y.size}, m)")
        if X.shape[1] != self.grid.m:
            raise DimensionError(f"curves have {X.shape[1]} points, grid has m={self.grid.m}")
        if y.size < 2:
            raise InsufficientDataError(f"a dataset needs n >= 2 observations, got {y.size}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def curves(self) -> List[Curve]:
        return [Curve(row, self.grid) for row in self.X]

    def subset(self, index: np.ndarray) -> "FunctionalDataset":
        index = np.asarray(index, dtype=int)
        return FunctionalDataset(self.grid, self.y[index], self.X[index])


@dataclass(frozen=True, eq=False)
class CovSpectrum:
    """Spectrum of the empirical covariance operator of a dataset.

    eigvals holds the q = min(n-1, m) leading eigenvalues (nonincreasing, tiny ones
    clamped to 0); eigfuns holds the matching eigenfunctions row-wise (q x m),
    orthonormal under the grid inner product.
    """
    grid: Grid
    eigvals: np.ndarray
    eigfuns: np.ndarray
    mean_curve: Curve
    cross_cov: Curve
    y_mean: float
    n: int
    trace: float

    @property
    def q(self) -> int:
        return int(self.eigvals.size)

    @property
    def positive_rank(self) -> int:
        return int(np.count_nonzero(self.eigvals > 0.0))

    @property
    def lambda1(self) -> float:
        return float(self.eigvals[0]) if self.q else 0.0

    def eigenfunction(self, j: int) -> Curve:
        """j-th eigenfunction, 1-based"""
        return Curve(self.eigfuns[j - 1], self.grid)

    def explained_variance(self, k: int) -> float:
        """Fraction of the trace captured by the first k eigenvalues"""
        if self.trace <= 0.0:
            return 0.0
        return float(np.sum(self.eigvals[:k]) / self.trace)
