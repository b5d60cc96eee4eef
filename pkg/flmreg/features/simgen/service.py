# flmreg/features/simgen/service.py
"""Seeded generators for Karhunen-Loeve simulation designs"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from flmreg.core.exceptions import DomainError
from flmreg.shared.constants import (
    ORACLE_ORTHONORMALITY_TOL,
    STREAM_DATA,
    STREAM_MEASUREMENT_ERROR,
    UNIFORM_SCORE_HALF_WIDTH,
    BetaChoice,
    GridConvention,
    ScoreDistribution,
    Spacing,
)
from flmreg.shared.utils import substream
from flmreg.features.fda_core.models import Curve, FunctionalDataset, Grid
from flmreg.features.fda_core.service import weighted_eigenpairs
from flmreg.features.estimators.models import OracleSplit
from flmreg.features.analytic_mse.models import PopulationModel
from flmreg.features.analytic_mse.service import score_kurtosis
from .schemas import SimDesign

logger = logging.getLogger(__name__)

# cos(j pi t) with j = m vanishes on the midpoint grid
VANISHING_NORM2 = 0.5


def _basis_matrix(grid: Grid, J: int) -> np.ndarray:
    """J x m matrix of phi_1 = 1, phi_j = sqrt(2) cos(j pi t)"""
    basis = np.empty((J, grid.m))
    if J == 0:
        return basis
    basis[0] = 1.0
    j = np.arange(2, J + 1)[:, None]
    basis[1:] = np.sqrt(2.0) * np.cos(j * np.pi * grid.points[None, :])
    return basis


def kl_basis(m: int, J: int, convention: GridConvention = GridConvention.MIDPOINT) -> List[Curve]:
    """The cosine basis evaluated on an m-point grid"""
    if J < 0:
        raise DomainError(f"J must be nonnegative, got {J}")
    grid = Grid.equispaced(m, convention)
    return [Curve(row, grid) for row in _basis_matrix(grid, J)]


def gamma_sequence(spacing: Spacing, alpha: float, J: int) -> np.ndarray:
    """Score standard deviations gamma_1..gamma_J (signed)"""
    j = np.arange(1, J + 1)
    signs = np.where(j % 2 == 1, 1.0, -1.0)
    if spacing == Spacing.WELL_SPACED:
        return signs * j ** (-alpha / 2.0)
    gamma = np.empty(J)
    for index, jj in enumerate(j):
        if jj == 1:
            gamma[index] = 1.0
        elif jj <= 4:
            gamma[index] = 0.2 * signs[index] * (1.0 - 0.0001 * jj)
        else:
            block, offset = divmod(int(jj), 5)
            gamma[index] = 0.2 * signs[index] * ((5.0 * block) ** (-alpha / 2.0) - 0.0001 * offset)
    return gamma


def beta_coefficients(
    choice: BetaChoice, J: int, custom: Optional[Sequence[float]] = None
) -> np.ndarray:
    """b_1 = 1, b_j = 4 (-1)^{j+1} j^{-2}; beta2 keeps j <= 5, beta3 keeps j > 5"""
    if choice == BetaChoice.CUSTOM:
        if custom is None:
            raise DomainError("custom slope needs coefficients")
        coeffs = np.zeros(J)
        coeffs[: len(custom)] = custom
        return coeffs
    j = np.arange(1, J + 1)
    coeffs = 4.0 * np.where(j % 2 == 1, 1.0, -1.0) * j ** -2.0
    coeffs[0] = 1.0
    if choice == BetaChoice.BETA2:
        coeffs[j > 5] = 0.0
    elif choice == BetaChoice.BETA3:
        coeffs[j <= 5] = 0.0
    return coeffs


def design_grid(design: SimDesign) -> Grid:
    return Grid.equispaced(design.m, design.grid)


def true_beta(design: SimDesign) -> Curve:
    grid = design_grid(design)
    coeffs = beta_coefficients(design.beta_choice, design.n_components, design.custom_beta)
    return Curve(coeffs @ _basis_matrix(grid, design.n_components), grid)


def _draw_scores(rng: np.random.Generator, distribution: ScoreDistribution, shape: Tuple[int, int]) -> np.ndarray:
    if distribution == ScoreDistribution.UNIFORM:
        return UNIFORM_SCORE_HALF_WIDTH * (2.0 * rng.random(shape) - 1.0)
    if distribution == ScoreDistribution.GAUSSIAN:
        return rng.standard_normal(shape)
    return np.ones(shape)


@lru_cache(maxsize=64)
def _population_split(
    m: int, convention: GridConvention, spacing: Spacing, alpha: float, J: int, r: int
) -> OracleSplit:
    grid = Grid.equispaced(m, convention)
    basis = _basis_matrix(grid, J)
    variances = gamma_sequence(spacing, alpha, J) ** 2
    keep = np.sum(basis ** 2, axis=1) / m >= VANISHING_NORM2
    basis, variances = basis[keep], variances[keep]
    gram = basis @ basis.T / m
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) <= ORACLE_ORTHONORMALITY_TOL:
        order = np.argsort(-variances, kind="stable")
        eigvals, eigfuns = variances[order], basis[order]
    else:
        # basis not orthonormal on this grid: eigendecompose the population covariance
        covariance = basis.T @ (variances[:, None] * basis)
        eigvals, eigfuns = weighted_eigenpairs(covariance, basis.shape[0])
        positive = eigvals > 0.0
        eigvals, eigfuns = eigvals[positive], eigfuns[positive]
    if r > eigvals.size:
        raise DomainError(f"split r={r} exceeds the {eigvals.size} population components")
    logger.debug("population split m=%d J=%d kept=%d r=%d", m, J, eigvals.size, r)
    return OracleSplit(grid, r, eigvals, eigfuns)


def population_split(design: SimDesign, r: Optional[int] = None) -> OracleSplit:
    """True discrete eigenstructure of a design, the r leading components first"""
    r = design.split_r if r is None else r
    return _population_split(
        design.m, design.grid, design.spacing, float(design.alpha_decay), design.n_components, int(r)
    )


def population_model(design: SimDesign, split_r: Optional[int] = None) -> PopulationModel:
    """PopulationModel of a design for the closed-form oracle MSEs"""
    split = population_split(design, split_r)
    return PopulationModel.from_split(
        split,
        true_beta(design),
        design.noise_sd ** 2,
        score_kurtosis(design.score_distribution),
    )


def draw_dataset(
    design: SimDesign, replication: int = 0
) -> Tuple[FunctionalDataset, Curve, OracleSplit]:
    """One replication of a design: (data, true slope, true eigenstructure).

    Curves are X_i = sum_j gamma_j Z_ij phi_j and y_i = <X_i, beta>_m + noise.
    Replication k draws from its own substream of the design seed.
    """
    grid = design_grid(design)
    J = design.n_components
    basis = _basis_matrix(grid, J)
    gamma = gamma_sequence(design.spacing, design.alpha_decay, J)
    beta = true_beta(design)

    rng = substream(design.seed, replication, STREAM_DATA)
    scores = _draw_scores(rng, design.score_distribution, (design.n, J))
    X = (scores * gamma) @ basis
    y = X @ beta.values / grid.m + design.noise_sd * rng.standard_normal(design.n)

    data = FunctionalDataset(grid, y, X)
    if design.measurement_error_sd > 0:
        data = add_measurement_error(data, design.measurement_error_sd, design.seed, replication)
    # designs shorter than split_r reveal every component
    return data, beta, population_split(design, min(design.split_r, J))


def add_measurement_error(
    data: FunctionalDataset, sd: float, seed: int, replication: int = 0
) -> FunctionalDataset:
    """W_i(t_p) = X_i(t_p) + sd * xi_ip with independent standard Gaussian xi"""
    if sd < 0:
        raise DomainError(f"measurement error sd must be nonnegative, got {sd}")
    if sd == 0:
        return data
    rng = substream(seed, replication, STREAM_MEASUREMENT_ERROR)
    noise = sd * rng.standard_normal(data.X.shape)
    return FunctionalDataset(data.grid, data.y, data.X + noise)
