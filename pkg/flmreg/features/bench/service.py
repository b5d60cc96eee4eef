# flmreg/features/bench/service.py
"""Monte-Carlo MSE studies, rho sweeps and split-sample prediction error"""

import logging
import math
import time
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from flmreg.core.config import Settings
from flmreg.core.exceptions import ConfigurationError, FlmRegException, RunError
from flmreg.shared.constants import (
    STREAM_SPLIT,
    STREAM_TUNING,
    Method,
    SelectionMode,
)
from flmreg.shared.utils import (
    argmin_with_ties,
    derived_seed,
    format_execution_time,
    mc_standard_error,
    substream,
)
from flmreg.features.fda_core.models import CovSpectrum, Curve, FunctionalDataset
from flmreg.features.fda_core.service import empirical_spectrum
from flmreg.features.estimators.models import OracleSplit, SlopeEstimate
from flmreg.features.estimators.service import (
    fit_hybrid_oracle,
    fit_spectral_truncation,
    fit_tikhonov,
    fit_tikhonov_oracle,
    mse_against_truth,
    predict_many,
)
from flmreg.features.selection.service import (
    double_cv,
    fit_with_parameters,
    gcv_rank,
    gcv_rho,
    kfold_cv,
    parameter_grid,
    select_hybrid,
)
from flmreg.features.analytic_mse.service import oracle_mse_curve
from flmreg.features.simgen.schemas import SimDesign
from flmreg.features.simgen.service import draw_dataset, population_model, population_split
from .dao import BenchDAO
from .schemas import (
    ExperimentConfig,
    FitSummary,
    MseRow,
    MseTable,
    OracleMseRecord,
    OracleMseTable,
    PredictionRow,
    PredictionTable,
    ReplicationRecord,
    RhoSweepTable,
    SweepPoint,
    SweepRatio,
    TuningSpec,
)

logger = logging.getLogger(__name__)

ParameterPoint = Tuple[int, Optional[float]]


class CellOutcome(NamedTuple):
    """Result of one tuning spec on one replication"""
    mse: float = math.nan
    r: int = 0
    rho: float = 0.0
    error: Optional[str] = None
    grid_mse: Optional[np.ndarray] = None


def _rho_unit(tuning: TuningSpec, spec: Optional[CovSpectrum], split: Optional[OracleSplit]) -> float:
    """lambda_1 that relative rho grids are scaled by"""
    if tuning.method.is_oracle or tuning.mode == SelectionMode.ORACLE_BEST:
        if split is None:
            raise ConfigurationError(f"{tuning.method.value}/{tuning.mode.value} needs a simulation design")
        return float(split.eigvals[0])
    return spec.lambda1


def _fit_point(
    data: FunctionalDataset,
    method: Method,
    r: int,
    rho: Optional[float],
    spec: Optional[CovSpectrum],
    split: Optional[OracleSplit],
) -> SlopeEstimate:
    if method == Method.HR_ORACLE:
        return fit_hybrid_oracle(data, split.with_r(r), rho)
    if method == Method.TR_ORACLE:
        return fit_tikhonov_oracle(data, split, rho)
    return fit_with_parameters(data, spec, method, r, rho)


def tuning_grid(
    tuning: TuningSpec, spec: Optional[CovSpectrum], split: Optional[OracleSplit]
) -> List[ParameterPoint]:
    """Every (r, rho) a tuning spec searches, rho in absolute units"""
    rho_values = tuning.rho_values(_rho_unit(tuning, spec, split))
    base = {Method.HR_ORACLE: Method.HR, Method.TR_ORACLE: Method.TR}.get(tuning.method, tuning.method)
    return parameter_grid(base, tuning.resolved_r_values(), rho_values)


def fit_with_tuning(
    data: FunctionalDataset,
    tuning: TuningSpec,
    spec: Optional[CovSpectrum] = None,
    split: Optional[OracleSplit] = None,
    seed: int = 0,
    replication: int = 0,
) -> SlopeEstimate:
    """Choose tuning parameters on data as the tuning mode prescribes, then fit"""
    spec = spec if spec is not None else empirical_spectrum(data)
    method, mode = tuning.method, tuning.mode
    if mode == SelectionMode.ORACLE_BEST:
        raise ConfigurationError("oracle_best selects across replications, not within one fit")

    if mode == SelectionMode.FIXED:
        r, rho = tuning_grid(tuning, spec, split)[0]
        return _fit_point(data, method, r, rho, spec, split)

    rho_values = tuning.rho_values(_rho_unit(tuning, spec, split))
    if mode == SelectionMode.GCV:
        if method == Method.ST:
            selection = gcv_rank(data, spec, tuning.resolved_r_values())
            return fit_spectral_truncation(data, spec, selection.r)
        if method == Method.TR:
            selection = gcv_rho(data, spec, 0, rho_values, tuning.rule)
            return fit_tikhonov(data, spec, selection.rho)
        _, estimate = select_hybrid(data, spec, tuning.condition_number, rho_values, tuning.rule)
        return estimate

    cv_seed = derived_seed(seed, replication, STREAM_TUNING)
    if mode == SelectionMode.DOUBLE_CV and method == Method.HR:
        selection = double_cv(
            data, max(tuning.resolved_r_values()), rho_values, tuning.folds, cv_seed, tuning.rule
        )
    else:
        grid = parameter_grid(method, tuning.resolved_r_values(), rho_values)
        selection = kfold_cv(data, method, grid, tuning.folds, cv_seed, rule=tuning.rule)
    return fit_with_parameters(data, spec, method, selection.r, selection.rho)


def _grid_mse(
    data: FunctionalDataset,
    beta: Curve,
    tuning: TuningSpec,
    spec: CovSpectrum,
    split: OracleSplit,
) -> np.ndarray:
    points = tuning_grid(tuning, spec, split)
    values = np.empty(len(points))
    for index, (r, rho) in enumerate(points):
        try:
            values[index] = mse_against_truth(_fit_point(data, tuning.method, r, rho, spec, split), beta)
        except FlmRegException:
            values[index] = math.inf
    return values


def _evaluate_cell(
    data: FunctionalDataset,
    beta: Curve,
    spec: CovSpectrum,
    split: OracleSplit,
    tuning: TuningSpec,
    seed: int,
    replication: int,
) -> CellOutcome:
    try:
        if tuning.mode == SelectionMode.ORACLE_BEST:
            return CellOutcome(grid_mse=_grid_mse(data, beta, tuning, spec, split))
        estimate = fit_with_tuning(data, tuning, spec, split, seed, replication)
        return CellOutcome(
            mse=mse_against_truth(estimate, beta),
            r=int(estimate.r or 0),
            rho=float(estimate.rho or 0.0),
        )
    except FlmRegException as exc:
        return CellOutcome(error=f"{type(exc).__name__}: {exc}")


def _mc_replication(task: Tuple[SimDesign, List[TuningSpec], int]) -> List[CellOutcome]:
    design, tunings, replication = task
    try:
        data, beta, split = draw_dataset(design, replication)
        spec = empirical_spectrum(data)
    except FlmRegException as exc:
        return [CellOutcome(error=f"{type(exc).__name__}: {exc}") for _ in tunings]
    return [_evaluate_cell(data, beta, spec, split, tuning, design.seed, replication) for tuning in tunings]


def _split_replication(task: Tuple[FunctionalDataset, List[TuningSpec], int, int, int]) -> List[CellOutcome]:
    data, tunings, seed, split_index, n_train = task
    permutation = substream(seed, split_index, STREAM_SPLIT).permutation(data.n)
    train_index, test_index = np.sort(permutation[:n_train]), np.sort(permutation[n_train:])
    train = data.subset(train_index)
    outcomes = []
    try:
        spec = empirical_spectrum(train)
    except FlmRegException as exc:
        return [CellOutcome(error=f"{type(exc).__name__}: {exc}") for _ in tunings]
    for tuning in tunings:
        try:
            estimate = fit_with_tuning(train, tuning, spec, None, seed, split_index)
            errors = data.y[test_index] - predict_many(estimate, data.X[test_index])
            outcomes.append(CellOutcome(
                mse=float(np.mean(errors ** 2)),
                r=int(estimate.r or 0),
                rho=float(estimate.rho or 0.0),
            ))
        except FlmRegException as exc:
            outcomes.append(CellOutcome(error=f"{type(exc).__name__}: {exc}"))
    return outcomes


class BenchService:
    """Runs the benchmark protocols; replications are mapped over a process pool in index order"""

    def __init__(self, settings: Settings, dao: Optional[BenchDAO] = None):
        self.settings = settings
        self.dao = dao or BenchDAO()

    def _workers(self, config: ExperimentConfig) -> int:
        return config.workers or self.settings.workers

    def _budget(self, config: ExperimentConfig) -> float:
        return self.settings.failure_budget if config.failure_budget is None else config.failure_budget

    def _map(self, func: Callable, tasks: Sequence, workers: int) -> List:
        if workers <= 1 or len(tasks) <= 1:
            return [func(task) for task in tasks]
        with Pool(processes=workers) as pool:
            return pool.map(func, tasks)

    def _check_failures(self, label: str, failures: int, total: int, budget: float) -> None:
        if failures == 0:
            return
        logger.warning("%s: %d of %d replications failed and were excluded", label, failures, total)
        if failures > budget * total or failures == total:
            raise RunError(f"{label}: {failures} of {total} replications failed (budget {budget:.2%})")

    def _collect_cell(
        self,
        outcomes: List[CellOutcome],
        label: str,
        budget: float,
    ) -> Tuple[List[int], List[CellOutcome], int]:
        failed = [k for k, o in enumerate(outcomes) if o.error is not None]
        for k in failed[:3]:
            logger.debug("%s replication %d: %s", label, k, outcomes[k].error)
        self._check_failures(label, len(failed), len(outcomes), budget)
        kept = [k for k, o in enumerate(outcomes) if o.error is None]
        return kept, [outcomes[k] for k in kept], len(failed)

    def _best_grid_point(
        self, label: str, points: List[ParameterPoint], matrix: np.ndarray
    ) -> Tuple[int, np.ndarray]:
        means = np.where(np.all(np.isfinite(matrix), axis=0), matrix.mean(axis=0), math.inf)
        try:
            best = argmin_with_ties([(r, rho, float(s)) for (r, rho), s in zip(points, means)])
        except ValueError:
            raise RunError(f"{label}: no grid point could be fit on every replication")
        return best, means

    def run_mc_study(self, config: ExperimentConfig) -> MseTable:
        """Mean MSE and its MC standard error for every (design, tuning spec) cell"""
        start_time = time.time()
        workers, budget = self._workers(config), self._budget(config)
        table = MseTable(replications=config.replications)
        logger.info("mc study: %d designs x %d tuning specs x %d replications on %d workers",
                    len(config.designs()), len(config.tuning), config.replications, workers)

        for design in config.designs():
            tasks = [(design, config.tuning, k) for k in range(config.replications)]
            results = self._map(_mc_replication, tasks, workers)
            beta_label, alpha = design.beta_choice.value, float(design.alpha_decay)

            for index, tuning in enumerate(config.tuning):
                label = f"{beta_label}/alpha={alpha:g}/{tuning.method.value}/{tuning.label}"
                kept, outcomes, failures = self._collect_cell([res[index] for res in results], label, budget)
                table.failures += failures

                if tuning.mode == SelectionMode.ORACLE_BEST:
                    points = tuning_grid(tuning, None, population_split(design))
                    matrix = np.vstack([o.grid_mse for o in outcomes])
                    best, means = self._best_grid_point(label, points, matrix)
                    values = matrix[:, best]
                    r_best, rho_best = points[best]
                    r_values = [r_best] * len(values)
                    rho_values = [float(rho_best or 0.0)] * len(values)
                else:
                    values = np.array([o.mse for o in outcomes])
                    r_values = [o.r for o in outcomes]
                    rho_values = [o.rho for o in outcomes]

                table.rows.append(MseRow(
                    beta=beta_label,
                    alpha=alpha,
                    method=tuning.method.value,
                    selection=tuning.label,
                    mean_mse=float(np.mean(values)),
                    mc_se=mc_standard_error(values),
                    mean_r=float(np.mean(r_values)),
                    mean_rho=float(np.mean(rho_values)),
                    failures=failures,
                ))
                table.replication_records.extend(
                    ReplicationRecord(
                        beta=beta_label, alpha=alpha, method=tuning.method.value, selection=tuning.label,
                        replication=k, mse=float(v), r=int(r), rho=float(rho),
                    )
                    for k, v, r, rho in zip(kept, values, r_values, rho_values)
                )
            logger.info("design %s alpha=%g done after %s", beta_label, alpha,
                        format_execution_time((time.time() - start_time) * 1000, config.replications))
        return table

    def run_rho_sweep(
        self,
        config: ExperimentConfig,
        r_values: Optional[Sequence[int]] = None,
        rho_grid: Optional[Sequence[float]] = None,
    ) -> RhoSweepTable:
        """MC-mean MSE along the rho grid for Tikhonov (r = 0) and the hybrid at each r"""
        start_time = time.time()
        sweep = config.rho_sweep
        tuning = TuningSpec(
            method=Method.HR,
            mode=SelectionMode.ORACLE_BEST,
            r_values=list(sweep.r_values if r_values is None else r_values),
            rho_grid=list(sweep.rho_grid if rho_grid is None else rho_grid),
            rho_scale=sweep.rho_scale,
        )
        workers, budget = self._workers(config), self._budget(config)
        table = RhoSweepTable(replications=config.replications)

        for design in config.designs():
            tasks = [(design, [tuning], k) for k in range(config.replications)]
            results = self._map(_mc_replication, tasks, workers)
            beta_label, alpha = design.beta_choice.value, float(design.alpha_decay)
            label = f"{beta_label}/alpha={alpha:g}/sweep"
            kept, outcomes, failures = self._collect_cell([res[0] for res in results], label, budget)
            table.failures += failures

            points = tuning_grid(tuning, None, population_split(design))
            matrix = np.vstack([o.grid_mse for o in outcomes])
            finite = np.all(np.isfinite(matrix), axis=0)
            if not np.all(finite):
                logger.warning("%s: %d grid points failed on some replication and are omitted",
                               label, int(np.count_nonzero(~finite)))

            minima = {}
            for r in tuning.resolved_r_values():
                curve = [i for i, (pr, _) in enumerate(points) if pr == r and finite[i]]
                if curve:
                    minima[r] = min(curve, key=lambda i: (matrix[:, i].mean(), -points[i][1]))
            for i, (r, rho) in enumerate(points):
                if not finite[i]:
                    continue
                column = matrix[:, i]
                table.rows.append(SweepPoint(
                    beta=beta_label,
                    alpha=alpha,
                    method=Method.TR.value if r == 0 else Method.HR.value,
                    r=r,
                    rho=float(rho),
                    mean_mse=float(column.mean()),
                    mc_se=mc_standard_error(column),
                    is_minimum=minima.get(r) == i,
                ))
            for r, i in minima.items():
                table.replication_records.extend(
                    ReplicationRecord(
                        beta=beta_label, alpha=alpha, method=Method.TR.value if r == 0 else Method.HR.value,
                        selection="sweep_minimum", replication=k, mse=float(v), r=r, rho=float(points[i][1]),
                    )
                    for k, v in zip(kept, matrix[:, i])
                )

            min_tr = float(matrix[:, minima[0]].mean()) if 0 in minima else None
            hr_minima = [float(matrix[:, i].mean()) for r, i in minima.items() if r > 0]
            min_hr = min(hr_minima) if hr_minima else None
            ratio = min_tr / min_hr if min_tr is not None and min_hr else None
            table.ratios.append(SweepRatio(beta=beta_label, alpha=alpha, min_tr=min_tr, min_hr=min_hr, ratio=ratio))
            logger.info("sweep %s alpha=%g: min TR / min HR = %s (%s)", beta_label, alpha,
                        f"{ratio:.3f}" if ratio is not None else "n/a",
                        format_execution_time((time.time() - start_time) * 1000, config.replications))
        return table

    def run_split_prediction(
        self, data_file: Optional[Path], config: ExperimentConfig, data: Optional[FunctionalDataset] = None
    ) -> PredictionTable:
        """Mean squared test-set prediction error over random train/test splits"""
        for tuning in config.tuning:
            if tuning.method.is_oracle or tuning.mode == SelectionMode.ORACLE_BEST:
                raise ConfigurationError(f"{tuning.method.value}/{tuning.label} needs the true slope")
        if data is None:
            if data_file is None:
                raise ConfigurationError("split prediction needs a data file")
            response_file = Path(config.response_file) if config.response_file else None
            data = self.dao.ingest_csv(Path(data_file), config.layout, response_file)
        n_train = int(round(config.train_frac * data.n))
        n_train = min(max(n_train, 2), data.n - 1)
        if n_train < 2:
            raise ConfigurationError(f"n={data.n} is too small for a train/test split")

        workers, budget = self._workers(config), self._budget(config)
        tasks = [(data, config.tuning, config.seed, s, n_train) for s in range(config.splits)]
        results = self._map(_split_replication, tasks, workers)
        table = PredictionTable(n=data.n, train_size=n_train)
        for index, tuning in enumerate(config.tuning):
            label = f"split/{tuning.method.value}/{tuning.label}"
            kept, outcomes, failures = self._collect_cell([res[index] for res in results], label, budget)
            table.failures += failures
            errors = np.array([o.mse for o in outcomes])
            table.rows.append(PredictionRow(
                method=tuning.method.value,
                selection=tuning.label,
                mean_error=float(errors.mean()),
                mc_se=mc_standard_error(errors),
                mean_r=float(np.mean([o.r for o in outcomes])),
                mean_rho=float(np.mean([o.rho for o in outcomes])),
                splits=len(outcomes),
                failures=failures,
            ))
            table.replication_records.extend(
                ReplicationRecord(
                    beta="data", alpha=0.0, method=tuning.method.value, selection=tuning.label,
                    replication=k, mse=o.mse, r=o.r, rho=o.rho,
                )
                for k, o in zip(kept, outcomes)
            )
            logger.info("%s: mean prediction error %.4f over %d splits", label, errors.mean(), len(outcomes))
        return table

    def fit_dataset(self, data: FunctionalDataset, tuning: TuningSpec, seed: int = 0) -> FitSummary:
        """One fit of one method on one dataset"""
        estimate = fit_with_tuning(data, tuning, seed=seed)
        return FitSummary(
            method=estimate.method.value,
            selection=tuning.label,
            r=int(estimate.r or 0),
            rho=float(estimate.rho or 0.0),
            df=estimate.df,
            intercept=estimate.intercept,
            grid=estimate.grid.points.tolist(),
            beta=estimate.beta.values.tolist(),
            tie_warning=estimate.tie_warning,
        )

    def simulate(self, design: SimDesign, replication: int = 0) -> FunctionalDataset:
        data, _, _ = draw_dataset(design, replication)
        return data

    def oracle_mse(self, config: ExperimentConfig) -> OracleMseTable:
        """Analytic oracle MSE curves for each design along the sweep rho grid"""
        table = OracleMseTable()
        tuning = config.rho_sweep.tuning()
        for design in config.designs():
            model = population_model(design)
            rho_values = tuning.rho_values(float(model.eigvals[0]))
            curve = oracle_mse_curve(model, rho_values, design.n)
            for point in curve.points:
                table.rows.append(OracleMseRecord(
                    beta=design.beta_choice.value,
                    alpha=float(design.alpha_decay),
                    n=design.n,
                    split_r=model.split_r,
                    threshold_n=curve.threshold_n,
                    **point.model_dump(),
                ))
        return table
