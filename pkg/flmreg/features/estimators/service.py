# flmreg/features/estimators/service.py
"""Spectral truncation, Tikhonov and hybrid slope estimators"""

import logging
from typing import Tuple, Union

import numpy as np

from flmreg.core.exceptions import DimensionError, DomainError, NumericError, RankError
from flmreg.shared.constants import Method, NULLSPACE_RESIDUAL_TOL
from flmreg.features.fda_core.models import CovSpectrum, Curve, FunctionalDataset
from flmreg.features.fda_core.service import inner_product
from .models import OracleSplit, SlopeEstimate

logger = logging.getLogger(__name__)


def _check_inputs(data: FunctionalDataset, spec: CovSpectrum) -> None:
    data.grid.require_match(spec.grid)
    if data.n != spec.n:
        raise DimensionError(f"spectrum was computed from n={spec.n} observations, dataset has n={data.n}")


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")


def _intercept(y_mean: float, mean_curve: Curve, beta: Curve) -> float:
    return y_mean - inner_product(mean_curve, beta, beta.grid)


def _has_tie(eigvals: np.ndarray, r: int) -> bool:
    if r < 1 or r >= eigvals.size or eigvals[r - 1] <= 0:
        return False
    return bool(np.isclose(eigvals[r - 1], eigvals[r], rtol=1e-10, atol=0.0))


def _assemble(
    eigvals: np.ndarray,
    eigfuns: np.ndarray,
    r: int,
    rho: float,
    head_coeffs: np.ndarray,
    tail_coeffs: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """beta = sum_{j<=r} c_j/lambda_j phi_j + sum_{j>r, lambda_j>0} c_j/(lambda_j+rho) phi_j"""
    weights = np.zeros(eigvals.size)
    weights[:r] = 1.0 / eigvals[:r]
    tail = eigvals[r:]
    # clamped directions carry no weight (Moore-Penrose)
    weights[r:] = np.divide(1.0, tail + rho, out=np.zeros_like(tail), where=tail > 0.0)
    coefficients = np.concatenate([head_coeffs, tail_coeffs]) * weights
    return coefficients @ eigfuns, coefficients


def split_cross_covariance(data: FunctionalDataset, spec: CovSpectrum, r: int) -> Tuple[Curve, Curve]:
    """Cross-covariances of y with the leading-r part and the remainder of the curves.

    Y_i = sum_{j<=r} <X_i, phi_j> phi_j, Z_i = X_i - Y_i; each part is centred before
    forming n^{-1} sum (y_i - ybar)(part_i - mean part).
    """
    _check_inputs(data, spec)
    m = data.m
    head = spec.eigfuns[:r]
    scores = data.X @ head.T / m
    Y = scores @ head
    Z = data.X - Y
    yc = data.y - spec.y_mean
    C1 = (Y - Y.mean(axis=0)).T @ yc / data.n
    C2 = (Z - Z.mean(axis=0)).T @ yc / data.n
    return Curve(C1, data.grid), Curve(C2, data.grid)


def _hybrid_from_parts(
    data: FunctionalDataset,
    spec: CovSpectrum,
    r: int,
    rho: float,
    C1: Curve,
    C2: Curve,
    method: Method,
) -> SlopeEstimate:
    m = data.m
    coeffs1 = spec.eigfuns[:r] @ C1.values / m
    all_coeffs2 = spec.eigfuns @ C2.values / m
    residual = C2.values - all_coeffs2 @ spec.eigfuns
    residual_norm = float(np.sqrt(residual @ residual / m))
    scale = max(1.0, float(np.sqrt(C2.values @ C2.values / m)))
    if residual_norm > NULLSPACE_RESIDUAL_TOL * scale:
        raise NumericError(
            f"cross-covariance has a component of norm {residual_norm:.3e} outside the retained spectrum"
        )

    beta_values, coefficients = _assemble(spec.eigvals, spec.eigfuns, r, rho, coeffs1, all_coeffs2[r:])
    beta = Curve(beta_values, data.grid)
    tail = spec.eigvals[r:]
    df = 1.0 + r + float(np.sum(tail / (tail + rho)))
    tie = _has_tie(spec.eigvals, r)
    if tie:
        logger.warning("eigenvalue tie at split r=%d (lambda=%.6g); splitting by index", r, spec.eigvals[r - 1])
    return SlopeEstimate(
        beta=beta,
        intercept=_intercept(spec.y_mean, spec.mean_curve, beta),
        method=method,
        r=r,
        rho=float(rho),
        df=df,
        coefficients=coefficients,
        tie_warning=tie,
    )


def fit_spectral_truncation(data: FunctionalDataset, spec: CovSpectrum, r: int) -> SlopeEstimate:
    """beta = sum_{j<=r} lambda_j^{-1} <C, phi_j> phi_j (principal component regression)"""
    _check_inputs(data, spec)
    if r < 1 or r > spec.positive_rank:
        raise RankError(f"r={r} outside 1..{spec.positive_rank} (positive rank)")
    coeffs = spec.eigfuns[:r] @ spec.cross_cov.values / data.m
    coefficients = coeffs / spec.eigvals[:r]
    beta = Curve(coefficients @ spec.eigfuns[:r], data.grid)
    return SlopeEstimate(
        beta=beta,
        intercept=_intercept(spec.y_mean, spec.mean_curve, beta),
        method=Method.ST,
        r=r,
        rho=None,
        df=1.0 + r,
        coefficients=coefficients,
        tie_warning=_has_tie(spec.eigvals, r),
    )


def fit_tikhonov(data: FunctionalDataset, spec: CovSpectrum, rho: float) -> SlopeEstimate:
    """beta = (K + rho I)^{-1} C over the retained spectrum and its complement"""
    _check_inputs(data, spec)
    _check_rho(rho)
    C = spec.cross_cov
    return _hybrid_from_parts(data, spec, 0, rho, Curve.zeros(data.grid), C, Method.TR)


def fit_hybrid(data: FunctionalDataset, spec: CovSpectrum, r: int, rho: float) -> SlopeEstimate:
    """Leave the leading r-block unpenalised and ridge the remainder"""
    _check_inputs(data, spec)
    _check_rho(rho)
    if r < 0 or r > spec.positive_rank:
        raise RankError(f"r={r} outside 0..{spec.positive_rank} (positive rank)")
    C1, C2 = split_cross_covariance(data, spec, r)
    estimate = _hybrid_from_parts(data, spec, r, rho, C1, C2, Method.HR)
    logger.debug("hybrid fit r=%d rho=%.4g df=%.3f", r, rho, estimate.df)
    return estimate


def _oracle_cross_cov(data: FunctionalDataset, centered: bool) -> Tuple[float, Curve, np.ndarray]:
    y_mean = float(np.mean(data.y))
    x_mean = data.X.mean(axis=0)
    if centered:
        C = (data.X - x_mean).T @ (data.y - y_mean) / data.n
    else:
        C = data.X.T @ data.y / data.n
    return y_mean, Curve(x_mean, data.grid), C


def _fit_oracle(
    data: FunctionalDataset,
    split: OracleSplit,
    r: int,
    rho: float,
    method: Method,
    centered: bool,
) -> SlopeEstimate:
    data.grid.require_match(split.grid)
    _check_rho(rho)
    if r >= 1 and split.eigvals[r - 1] <= 0:
        raise RankError(f"true eigenvalue lambda_{r} is zero")
    y_mean, mean_curve, C = _oracle_cross_cov(data, centered)
    coeffs = split.eigfuns @ C / data.m
    beta_values, coefficients = _assemble(split.eigvals, split.eigfuns, r, rho, coeffs[:r], coeffs[r:])
    beta = Curve(beta_values, data.grid)
    tail = split.eigvals[r:]
    return SlopeEstimate(
        beta=beta,
        intercept=_intercept(y_mean, mean_curve, beta),
        method=method,
        r=r,
        rho=float(rho),
        df=1.0 + r + float(np.sum(tail / (tail + rho))),
        coefficients=coefficients,
        tie_warning=_has_tie(split.eigvals, r),
    )


def fit_hybrid_oracle(
    data: FunctionalDataset, split: OracleSplit, rho: float, centered: bool = True
) -> SlopeEstimate:
    """Hybrid estimator built on the true eigenstructure.

    centered=False uses the raw cross-covariance n^{-1} sum y_i X_i, the form under
    which the closed-form MSE expansions are exact.
    """
    return _fit_oracle(data, split, split.r, rho, Method.HR_ORACLE, centered)


def fit_tikhonov_oracle(
    data: FunctionalDataset, split: OracleSplit, rho: float, centered: bool = True
) -> SlopeEstimate:
    """(K + rho I)^{-1} C with the population covariance K"""
    return _fit_oracle(data, split, 0, rho, Method.TR_ORACLE, centered)


def predict(est: SlopeEstimate, x: Curve) -> float:
    """alpha + <x, beta>_m"""
    return est.intercept + inner_product(x, est.beta, est.grid)


def predict_many(est: SlopeEstimate, X: Union[np.ndarray, FunctionalDataset]) -> np.ndarray:
    """Predictions for a matrix of curves (one per row)"""
    if isinstance(X, FunctionalDataset):
        est.grid.require_match(X.grid)
        X = X.X
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != est.grid.m:
        raise DimensionError(f"curve matrix has shape {X.shape}, estimate grid has m={est.grid.m}")
    return est.intercept + X @ est.beta.values / est.grid.m


def mse_against_truth(est: SlopeEstimate, beta_true: Curve) -> float:
    """m^{-1} sum_p (beta_hat(t_p) - beta(t_p))^2"""
    est.grid.require_match(beta_true.grid)
    diff = est.beta.values - beta_true.values
    return float(diff @ diff / est.grid.m)
