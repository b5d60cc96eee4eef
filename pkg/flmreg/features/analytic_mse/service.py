# flmreg/features/analytic_mse/service.py
"""Closed-form MSE of the oracle Tikhonov and hybrid estimators.

Both expansions are exact for the raw cross-covariance oracle fits
(``centered=False``) when the component scores are independent; they are
evaluated on the finite J-component model without any tail term.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from flmreg.core.exceptions import DomainError
from flmreg.shared.constants import UNIFORM_SCORE_HALF_WIDTH, ScoreDistribution
from .models import DominationGap, OracleMse, PopulationModel
from .schemas import OracleMseCurve, OracleMsePoint

logger = logging.getLogger(__name__)


def _check(rho: float, n: int) -> None:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")


def _score_variance_terms(model: PopulationModel) -> np.ndarray:
    """n Var(<C, phi_j>) = b_j^2 {Var(xi_j^2) - lambda_j^2} + lambda_j {<K beta, beta> + sigma^2}"""
    lam = model.eigvals
    b2 = model.beta_coeffs ** 2
    return b2 * (model.coeff_kurtosis * lam ** 2 - lam ** 2) + lam * (model.beta_energy + model.sigma2)


def oracle_tr_mse(model: PopulationModel, rho: float, n: int) -> OracleMse:
    """MSE, squared bias and variance of the oracle Tikhonov estimator"""
    _check(rho, n)
    shrink = (model.eigvals + rho) ** -2
    variance = float(np.sum(shrink * _score_variance_terms(model)) / n)
    bias2 = float(rho ** 2 * np.sum(shrink * model.beta_coeffs ** 2))
    return OracleMse(bias2 + variance, bias2, variance)


def oracle_hr_mse(model: PopulationModel, rho: float, n: int) -> OracleMse:
    """As oracle_tr_mse, with the first split_r components left unshrunk"""
    _check(rho, n)
    r = model.split_r
    if r > model.J:
        raise DomainError(f"split_r={r} exceeds J={model.J}")
    weights = (model.eigvals + rho) ** -2
    weights[:r] = model.eigvals[:r] ** -2
    variance = float(np.sum(weights * _score_variance_terms(model)) / n)
    tail = slice(r, None)
    bias2 = float(rho ** 2 * np.sum((model.eigvals[tail] + rho) ** -2 * model.beta_coeffs[tail] ** 2))
    return OracleMse(bias2 + variance, bias2, variance)


def domination_gap(model: PopulationModel, rho: float, n: int) -> DominationGap:
    """MSE(TR) - MSE(HR) with its two components A1 (variance) and A2 (bias)"""
    tr = oracle_tr_mse(model, rho, n)
    hr = oracle_hr_mse(model, rho, n)
    head = slice(0, model.split_r)
    lam = model.eigvals[head]
    A1 = float(np.sum(((lam + rho) ** -2 - lam ** -2) * _score_variance_terms(model)[head]))
    A2 = float(np.sum((lam + rho) ** -2 * model.beta_coeffs[head] ** 2))
    return DominationGap(tr.mse - hr.mse, A1, A2)


def domination_threshold_n(model: PopulationModel, rho: float) -> Optional[int]:
    """Smallest n at which the hybrid oracle strictly beats the Tikhonov oracle.

    None when no such n exists (A2 = 0 and A1 <= 0).
    """
    _, A1, A2 = domination_gap(model, rho, 1)
    if A2 == 0.0:
        return 1 if A1 > 0 else None
    if A1 >= 0:
        return 1
    return int(math.floor(-A1 / (rho ** 2 * A2))) + 1


def oracle_mse_curve(model: PopulationModel, rho_grid: Sequence[float], n: int) -> OracleMseCurve:
    """Analytic TR and HR oracle MSEs along a rho grid"""
    points = []
    for rho in rho_grid:
        tr = oracle_tr_mse(model, float(rho), n)
        hr = oracle_hr_mse(model, float(rho), n)
        points.append(OracleMsePoint(
            rho=float(rho),
            tr_mse=tr.mse, tr_bias2=tr.bias2, tr_variance=tr.variance,
            hr_mse=hr.mse, hr_bias2=hr.bias2, hr_variance=hr.variance,
            gap=tr.mse - hr.mse,
        ))
    curve = OracleMseCurve(n=n, split_r=model.split_r, J=model.J, points=points)
    if points:
        curve.threshold_n = domination_threshold_n(model, curve.best_tr.rho)
    logger.debug("analytic curve over %d rho values, split r=%d", len(points), model.split_r)
    return curve


def uniform_score_kurtosis() -> float:
    """Var(Z^2) for Z uniform on [-sqrt(3), sqrt(3)], i.e. 4/5"""
    width = UNIFORM_SCORE_HALF_WIDTH
    score = stats.uniform(loc=-width, scale=2 * width)
    return float(score.moment(4) - score.moment(2) ** 2)


def score_kurtosis(distribution: ScoreDistribution) -> float:
    """Var(Z^2) of a unit-variance score distribution"""
    if distribution == ScoreDistribution.UNIFORM:
        return uniform_score_kurtosis()
    if distribution == ScoreDistribution.GAUSSIAN:
        normal = stats.norm()
        return float(normal.moment(4) - normal.moment(2) ** 2)
    return 0.0
