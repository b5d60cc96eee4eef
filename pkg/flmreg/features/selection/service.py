# flmreg/features/selection/service.py
"""Condition-index choice of r, GCV for rho, K-fold and double cross-validation"""

import logging
import math
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from flmreg.core.exceptions import (
    DomainError,
    FlmRegException,
    FoldError,
    NumericError,
    RankError,
    SelectionError,
)
from flmreg.shared.constants import DEFAULT_CONDITION_NUMBER, DEFAULT_FOLDS, Method, SelectionRule
from flmreg.shared.utils import argmin_with_ties, default_rho_grid
from flmreg.features.fda_core.models import CovSpectrum, FunctionalDataset
from flmreg.features.fda_core.service import empirical_spectrum
from flmreg.features.estimators.models import SlopeEstimate
from flmreg.features.estimators.service import (
    fit_hybrid,
    fit_spectral_truncation,
    fit_tikhonov,
    predict_many,
)
from .schemas import SelectionResult, SurfacePoint

logger = logging.getLogger(__name__)

ParameterPoint = Tuple[int, Optional[float]]


def condition_indices(spec: CovSpectrum) -> np.ndarray:
    """(lambda_1/lambda_j)^{1/2} over the positive spectrum"""
    positive = spec.eigvals[spec.eigvals > 0.0]
    if positive.size == 0:
        raise RankError("all eigenvalues are zero")
    return np.sqrt(positive[0] / positive)


def select_r_condition(spec: CovSpectrum, L: float = DEFAULT_CONDITION_NUMBER) -> int:
    """r = sup{j : (lambda_1/lambda_j)^{1/2} <= L}"""
    if not L >= 1.0:
        raise DomainError(f"condition number L must be >= 1, got {L}")
    indices = condition_indices(spec)
    # relative slack so an index that equals L up to rounding counts
    return int(np.count_nonzero(indices <= L * (1.0 + 1e-12)))


def fit_with_parameters(
    data: FunctionalDataset, spec: CovSpectrum, method: Method, r: Optional[int], rho: Optional[float]
) -> SlopeEstimate:
    """Dispatch to the estimator for a method and one grid point"""
    if method == Method.ST:
        return fit_spectral_truncation(data, spec, int(r))
    if method == Method.TR:
        return fit_tikhonov(data, spec, float(rho))
    if method == Method.HR:
        return fit_hybrid(data, spec, int(r or 0), float(rho))
    raise DomainError(f"method {method.value} cannot be tuned from data alone")


def parameter_grid(
    method: Method, r_values: Sequence[int] = (), rho_grid: Sequence[float] = ()
) -> List[ParameterPoint]:
    """Grid points (r, rho) for a method; ST ignores rho, TR ignores r"""
    if method == Method.ST:
        return [(int(r), None) for r in r_values]
    if method == Method.TR:
        return [(0, float(rho)) for rho in rho_grid]
    return [(int(r), float(rho)) for r, rho in product(r_values, rho_grid)]


def _mean_and_se(losses: np.ndarray) -> Tuple[float, float]:
    if losses.size < 2:
        return float(np.mean(losses)), 0.0
    return float(np.mean(losses)), float(np.std(losses, ddof=1) / math.sqrt(losses.size))


def _gcv_score(data: FunctionalDataset, estimate: SlopeEstimate) -> Tuple[float, Optional[float]]:
    """n RSS / (n - df)^2 as the mean of e_i^2 / (1 - df/n)^2, with its standard error"""
    n = data.n
    if estimate.df >= n:
        return math.inf, None
    residuals = data.y - predict_many(estimate, data.X)
    return _mean_and_se(residuals ** 2 / (1.0 - estimate.df / n) ** 2)


def _most_regularised(surface: List[SurfacePoint], best: SurfacePoint, tolerance: float) -> SurfacePoint:
    """Largest rho at the minimiser's r whose score is within tolerance of the minimum"""
    candidates = [
        p for p in surface
        if p.r == best.r and p.rho is not None and math.isfinite(p.score) and p.score <= best.score + tolerance
    ]
    return max(candidates, key=lambda p: p.rho)


def _result(
    method: Method,
    criterion: str,
    surface: List[SurfacePoint],
    df_lookup,
    rule: SelectionRule = SelectionRule.MINIMUM,
) -> SelectionResult:
    entries = [(p.r, p.rho, p.score) for p in surface]
    try:
        best = argmin_with_ties(entries)
    except ValueError:
        raise SelectionError(f"every {criterion} score is infinite for {method.value}")
    chosen = surface[best]
    tolerance = 0.0
    if rule == SelectionRule.ONE_SE and chosen.rho is not None and chosen.se is not None:
        tolerance = chosen.se
        chosen = _most_regularised(surface, chosen, tolerance)
        if chosen.rho != surface[best].rho:
            logger.debug("%s one-SE rule moved rho from %.4g to %.4g at r=%d",
                         criterion, surface[best].rho, chosen.rho, chosen.r)
    return SelectionResult(
        method=method,
        criterion=criterion,
        rule=rule,
        r=chosen.r,
        rho=chosen.rho,
        criterion_surface=surface,
        df_at_optimum=df_lookup(chosen.r, chosen.rho),
        tolerance=tolerance,
    )


def gcv_rho(
    data: FunctionalDataset,
    spec: CovSpectrum,
    r: int,
    rho_grid: Optional[Sequence[float]] = None,
    rule: SelectionRule = SelectionRule.ONE_SE,
) -> SelectionResult:
    """GCV(rho) = n RSS / (n - df)^2 for the hybrid fit at fixed r (r = 0 is Tikhonov).

    With the one-SE rule the largest rho whose score is within one standard error
    of the minimum is chosen; SelectionRule.MINIMUM returns the plain argmin.
    """
    grid = default_rho_grid(spec.lambda1) if rho_grid is None else np.asarray(rho_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("rho grid is empty")
    method = Method.HR if r > 0 else Method.TR
    surface = []
    dfs = {}
    for rho in grid:
        estimate = fit_hybrid(data, spec, r, float(rho)) if r > 0 else fit_tikhonov(data, spec, float(rho))
        dfs[float(rho)] = estimate.df
        score, se = _gcv_score(data, estimate)
        surface.append(SurfacePoint(r=r, rho=float(rho), score=score, se=se))
    result = _result(method, "gcv", surface, lambda _r, rho: dfs[rho], rule)
    logger.debug("gcv r=%d selected rho=%.4g", r, result.rho)
    return result


def gcv_rank(data: FunctionalDataset, spec: CovSpectrum, r_values: Sequence[int]) -> SelectionResult:
    """GCV over the truncation level of spectral truncation, df = 1 + r"""
    surface = []
    for r in r_values:
        try:
            estimate = fit_spectral_truncation(data, spec, int(r))
            score, se = _gcv_score(data, estimate)
        except RankError:
            score, se = math.inf, None
        surface.append(SurfacePoint(r=int(r), rho=None, score=score, se=se))
    if not surface:
        raise DomainError("r grid is empty")
    return _result(Method.ST, "gcv", surface, lambda r, _rho: 1.0 + r)


def select_hybrid(
    data: FunctionalDataset,
    spec: Optional[CovSpectrum] = None,
    L: float = DEFAULT_CONDITION_NUMBER,
    rho_grid: Optional[Sequence[float]] = None,
    rule: SelectionRule = SelectionRule.ONE_SE,
) -> Tuple[SelectionResult, SlopeEstimate]:
    """Condition-index r, then GCV rho, then the hybrid fit"""
    spec = spec or empirical_spectrum(data)
    r = select_r_condition(spec, L)
    selection = gcv_rho(data, spec, r, rho_grid, rule)
    logger.info("hybrid selection: r=%d rho=%.4g df=%.2f", r, selection.rho, selection.df_at_optimum)
    return selection, fit_hybrid(data, spec, r, selection.rho)


def make_folds(n: int, K: int, seed: int) -> List[np.ndarray]:
    """Seeded partition of range(n) into K folds of sizes floor(n/K) or ceil(n/K)"""
    if K < 2 or K > n:
        raise FoldError(f"K={K} folds outside 2..{n}")
    permutation = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(permutation, K)]


def _validate_folds(n: int, folds: Sequence[np.ndarray]) -> List[np.ndarray]:
    folds = [np.asarray(fold, dtype=int) for fold in folds]
    if len(folds) < 2:
        raise FoldError("at least two folds are required")
    for k, fold in enumerate(folds):
        if fold.size == 0:
            raise FoldError(f"fold {k} is empty")
        if n - fold.size < 2:
            raise FoldError(f"fold {k} leaves {n - fold.size} training observations")
    return folds


def kfold_cv(
    data: FunctionalDataset,
    method: Method,
    grid: Sequence[ParameterPoint],
    K: int = DEFAULT_FOLDS,
    seed: int = 0,
    folds: Optional[Sequence[np.ndarray]] = None,
    criterion: str = "kfold",
    rule: SelectionRule = SelectionRule.ONE_SE,
) -> SelectionResult:
    """Mean squared held-out prediction error for every grid point.

    The spectrum is refit on each training part; a grid point that cannot be fit on
    some fold (e.g. r beyond that fold's positive rank) scores +inf. Standard errors
    come from the held-out squared errors and drive the one-SE rule.
    """
    if not grid:
        raise DomainError("parameter grid is empty")
    folds = _validate_folds(data.n, make_folds(data.n, K, seed) if folds is None else folds)
    losses: List[List[np.ndarray]] = [[] for _ in grid]
    failed = np.zeros(len(grid), dtype=bool)
    everything = np.arange(data.n)
    for fold in folds:
        if np.unique(fold).size != fold.size:
            raise FoldError("fold contains repeated indices")
        train = data.subset(np.setdiff1d(everything, fold))
        spec = empirical_spectrum(train)
        for g, (r, rho) in enumerate(grid):
            if failed[g]:
                continue
            try:
                estimate = fit_with_parameters(train, spec, method, r, rho)
            except (RankError, NumericError) as exc:
                logger.debug("grid point r=%s rho=%s unusable on a fold: %s", r, rho, exc)
                failed[g] = True
                continue
            errors = data.y[fold] - predict_many(estimate, data.X[fold])
            losses[g].append(errors ** 2)

    surface = []
    for (r, rho), point_losses, point_failed in zip(grid, losses, failed):
        if point_failed:
            surface.append(SurfacePoint(r=r, rho=rho, score=math.inf))
            continue
        score, se = _mean_and_se(np.concatenate(point_losses))
        surface.append(SurfacePoint(r=r, rho=rho, score=score, se=se))
    full_spec = empirical_spectrum(data)

    def df_lookup(r, rho):
        try:
            return fit_with_parameters(data, full_spec, method, r, rho).df
        except FlmRegException:
            return math.nan

    return _result(method, criterion, surface, df_lookup, rule)


def double_cv(
    data: FunctionalDataset,
    r_max: int,
    rho_grid: Sequence[float],
    K: int = DEFAULT_FOLDS,
    seed: int = 0,
    rule: SelectionRule = SelectionRule.ONE_SE,
) -> SelectionResult:
    """Joint cross-validation over r in 0..r_max and the rho grid.

    r is the minimiser's; the one-SE rule only moves rho within that r.
    """
    if r_max < 0:
        raise DomainError(f"r_max must be nonnegative, got {r_max}")
    grid = parameter_grid(Method.HR, range(r_max + 1), rho_grid)
    return kfold_cv(data, Method.HR, grid, K, seed, criterion="double_cv", rule=rule)
