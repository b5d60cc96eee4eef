# flmreg/features/fda_core/service.py
"""Grid inner product, centering and the empirical covariance spectrum"""

import logging
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from flmreg.core.exceptions import DimensionError, DomainError, InsufficientDataError, NumericError
from flmreg.shared.constants import EIGENVALUE_CLAMP_RATIO, VARIANCE_RULE_FRACTION
from .models import CovSpectrum, Curve, FunctionalDataset, Grid

logger = logging.getLogger(__name__)

CurveLike = Union[Curve, np.ndarray]


def _values(c: CurveLike, grid: Grid) -> np.ndarray:
    if isinstance(c, Curve):
        grid.require_match(c.grid)
        return c.values
    values = np.asarray(c, dtype=float)
    if values.shape[-1] != grid.m:
        raise DimensionError(f"values have {values.shape[-1]} points, grid has m={grid.m}")
    return values


def inner_product(f: CurveLike, g: CurveLike, grid: Grid) -> float:
    """<f, g>_m = m^{-1} sum_p f(t_p) g(t_p)"""
    return float(np.dot(_values(f, grid), _values(g, grid)) / grid.m)


def norm(f: CurveLike, grid: Grid) -> float:
    return float(np.sqrt(inner_product(f, f, grid)))


def center(data: FunctionalDataset) -> Tuple[float, Curve, FunctionalDataset]:
    """Return (y mean, mean curve, centred dataset)"""
    if data.n < 2:
        raise InsufficientDataError(f"centering needs n >= 2, got {data.n}")
    y_mean = float(np.mean(data.y))
    x_mean = data.X.mean(axis=0)
    centered = FunctionalDataset(data.grid, data.y - y_mean, data.X - x_mean)
    return y_mean, Curve(x_mean, data.grid), centered


def weighted_eigenpairs(S: np.ndarray, q: int) -> Tuple[np.ndarray, np.ndarray]:
    """Leading q eigenpairs of the operator (1/m) S on an m-point grid.

    Eigenfunctions come back row-wise, rescaled by sqrt(m) so they are orthonormal
    under <.,.>_m, with the largest-magnitude entry of each made positive.
    Eigenvalues below 1e-12 * lambda_1 are clamped to zero.
    """
    m = S.shape[0]
    eigvals, eigvecs = linalg.eigh(S / m)
    order = np.argsort(eigvals)[::-1][:q]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    eigvals = np.where(eigvals > 0.0, eigvals, 0.0)
    if eigvals.size and eigvals[0] > 0.0:
        eigvals = np.where(eigvals >= EIGENVALUE_CLAMP_RATIO * eigvals[0], eigvals, 0.0)
    else:
        eigvals = np.zeros_like(eigvals)

    eigfuns = eigvecs.T * np.sqrt(m)
    # deterministic sign: largest-magnitude entry positive
    pivots = np.argmax(np.abs(eigfuns), axis=1)
    signs = np.sign(eigfuns[np.arange(eigfuns.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return eigvals, eigfuns * signs[:, None]


def empirical_spectrum(data: FunctionalDataset) -> CovSpectrum:
    """Eigendecomposition of the grid-weighted empirical covariance operator.

    Solves (1/m) S v = lambda v with S = n^{-1} Xc' Xc and keeps the q = min(n-1, m)
    leading pairs.
    """
    if not (np.all(np.isfinite(data.X)) and np.all(np.isfinite(data.y))):
        raise NumericError("dataset contains non-finite values")
    n, m = data.n, data.m
    y_mean, mean_curve, centered = center(data)
    Xc, yc = centered.X, centered.y

    S = Xc.T @ Xc / n
    q = min(n - 1, m)
    eigvals, eigfuns = weighted_eigenpairs(S, q)

    cross_cov = Curve(Xc.T @ yc / n, data.grid)
    trace = float(np.trace(S) / m)
    logger.debug("spectrum n=%d m=%d q=%d positive rank=%d", n, m, q, int(np.count_nonzero(eigvals)))

    eigvals.setflags(write=False)
    eigfuns.setflags(write=False)
    return CovSpectrum(
        grid=data.grid,
        eigvals=eigvals,
        eigfuns=eigfuns,
        mean_curve=mean_curve,
        cross_cov=cross_cov,
        y_mean=y_mean,
        n=n,
        trace=trace,
    )


def fourier_coeffs(c: CurveLike, spec: CovSpectrum, k: int) -> np.ndarray:
    """(<c, phi_1>_m, ..., <c, phi_k>_m)"""
    if k < 0 or k > spec.q:
        raise IndexError(f"k={k} outside 0..{spec.q}")
    values = _values(c, spec.grid)
    return spec.eigfuns[:k] @ values / spec.grid.m


def reconstruct(coeffs: np.ndarray, spec: CovSpectrum) -> Curve:
    """sum_j a_j phi_j over the first len(coeffs) eigenfunctions"""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size > spec.q:
        raise IndexError(f"{coeffs.size} coefficients for {spec.q} eigenfunctions")
    return Curve(coeffs @ spec.eigfuns[: coeffs.size], spec.grid)


def n_components_for_variance(spec: CovSpectrum, fraction: float = VARIANCE_RULE_FRACTION) -> int:
    """Smallest k whose leading eigenvalues explain the given fraction of the trace"""
    if not 0.0 < fraction <= 1.0:
        raise DomainError(f"fraction must be in (0, 1], got {fraction}")
    if spec.trace <= 0.0:
        return 0
    cumulative = np.cumsum(spec.eigvals) / spec.trace
    hits = np.nonzero(cumulative >= fraction - 1e-12)[0]
    return int(hits[0] + 1) if hits.size else spec.positive_rank
