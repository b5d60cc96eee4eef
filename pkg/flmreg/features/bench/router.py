# flmreg/features/bench/router.py
"""Command-line subcommands of the benchmark harness"""

import argparse
import logging
import time
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from flmreg import __version__
from flmreg.core.exceptions import ConfigurationError
from flmreg.shared.constants import CsvLayout, Method, OutputFormat, SelectionMode
from flmreg.shared.utils import format_execution_time
from .schemas import ExperimentConfig, ResultMetadata, TuningSpec
from .service import BenchService

logger = logging.getLogger(__name__)

DEFAULT_METHODS = [Method.ST, Method.TR, Method.HR]


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON experiment document")
    parser.add_argument("--seed", type=int, help="root seed (overrides the config)")
    parser.add_argument("--workers", type=int, help="worker processes (default FLMREG_WORKERS)")
    parser.add_argument("--out", type=Path, help="output path (default FLMREG_OUTPUT_DIR/<command>.<format>)")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], help="csv or json")


def _replication_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--reps", type=int, help="Monte-Carlo replications")
    parser.add_argument("--dump-replications", action="store_true", default=None,
                        help="also write <out>.replications.csv")


def _data_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, help="dataset file")
    parser.add_argument("--layout", choices=[c.value for c in CsvLayout], help="dataset layout")
    parser.add_argument("--response-file", type=Path, help="responses for the two_file layout")


def build_config(args: argparse.Namespace, service: BenchService) -> ExperimentConfig:
    """Config document (or defaults) with command-line overrides applied"""
    config = service.dao.load_config(args.config) if getattr(args, "config", None) else \
        ExperimentConfig(methods=DEFAULT_METHODS)
    overrides: Dict[str, Any] = {}
    for flag, key in (
        ("seed", "seed"), ("reps", "replications"), ("workers", "workers"), ("format", "format"),
        ("dump_replications", "dump_replications"), ("train_frac", "train_frac"), ("splits", "splits"),
        ("layout", "layout"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    for flag, key in (("out", "out"), ("data", "data_file"), ("response_file", "response_file")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = str(value)
    try:
        return ExperimentConfig.model_validate({**config.model_dump(), **overrides})
    except ValidationError as exc:
        raise ConfigurationError(f"invalid configuration: {exc}")


def _output_path(config: ExperimentConfig, service: BenchService, command: str) -> Path:
    if config.out:
        return Path(config.out)
    return Path(service.settings.output_dir) / f"{command}.{config.format.value}"


def _emit(service: BenchService, config: ExperimentConfig, command: str, table, start_time: float,
          summary: Optional[Dict[str, Any]] = None) -> int:
    wall_ms = (time.time() - start_time) * 1000
    per_replication = config.replications if command in ("mc-bench", "rho-sweep") else None
    metadata = ResultMetadata(
        version=__version__,
        command=command,
        seed=config.seed,
        replications=config.replications,
        workers=config.workers or service.settings.workers,
        failures=getattr(table, "failures", 0),
        wall_time_ms=wall_ms,
        wall_time=format_execution_time(wall_ms, per_replication),
        config=config.model_dump(mode="json"),
        summary=summary or {},
    )
    path = service.dao.emit_results(table, _output_path(config, service, command), config.format, metadata)
    records = getattr(table, "replication_records", None)
    if config.dump_replications and records is not None:
        service.dao.emit_replications(records, path.with_name(path.name + ".replications.csv"))
    logger.info("%s finished in %s", command, metadata.wall_time)
    return 0


def handle_simulate(args: argparse.Namespace, service: BenchService) -> int:
    config = build_config(args, service)
    design = config.designs()[0]
    data = service.simulate(design, args.replication)
    path = Path(config.out) if config.out else Path(service.settings.output_dir) / "simulated.csv"
    service.dao.write_dataset(data, path)
    logger.info("simulated n=%d m=%d replication %d to %s", data.n, data.m, args.replication, path)
    return 0


def handle_fit(args: argparse.Namespace, service: BenchService) -> int:
    start_time = time.time()
    config = build_config(args, service)
    if config.data_file:
        response = Path(config.response_file) if config.response_file else None
        data = service.dao.ingest_csv(Path(config.data_file), config.layout, response)
    else:
        data = service.simulate(config.designs()[0])
    try:
        tuning = TuningSpec(
            method=Method(args.method),
            mode=SelectionMode(args.mode) if args.mode else None,
            r_values=[args.r] if args.r is not None else [],
            rho_grid=[args.rho] if args.rho is not None else [],
            rho_scale="absolute" if args.rho is not None else "relative",
        )
    except ValidationError as exc:
        raise ConfigurationError(f"invalid fit options: {exc}")
    summary = service.fit_dataset(data, tuning, config.seed)
    logger.info("%s/%s fit: r=%d rho=%.4g df=%.2f", summary.method, summary.selection,
                summary.r, summary.rho, summary.df)
    return _emit(service, config, "fit", summary, start_time,
                 summary=summary.model_dump(exclude={"grid", "beta"}))


def handle_mc_bench(args: argparse.Namespace, service: BenchService) -> int:
    start_time = time.time()
    config = build_config(args, service)
    table = service.run_mc_study(config)
    for row in table.rows:
        logger.info("%s alpha=%g %s/%s: MSE %.4f (se %.4f)", row.beta, row.alpha, row.method,
                    row.selection, row.mean_mse, row.mc_se)
    return _emit(service, config, "mc-bench", table, start_time)


def handle_rho_sweep(args: argparse.Namespace, service: BenchService) -> int:
    start_time = time.time()
    config = build_config(args, service)
    table = service.run_rho_sweep(config, args.r_values, args.rho_grid)
    summary = {"ratios": [ratio.model_dump() for ratio in table.ratios]}
    return _emit(service, config, "rho-sweep", table, start_time, summary=summary)


def handle_predict_split(args: argparse.Namespace, service: BenchService) -> int:
    start_time = time.time()
    config = build_config(args, service)
    table = service.run_split_prediction(Path(config.data_file) if config.data_file else None, config)
    return _emit(service, config, "predict-split", table, start_time,
                 summary={"n": table.n, "train_size": table.train_size})


def handle_oracle_mse(args: argparse.Namespace, service: BenchService) -> int:
    start_time = time.time()
    config = build_config(args, service)
    return _emit(service, config, "oracle-mse", service.oracle_mse(config), start_time)


def register(subparsers) -> None:
    """Add the benchmark subcommands to a parser"""
    simulate = subparsers.add_parser("simulate", help="draw one dataset from a design")
    _common_flags(simulate)
    simulate.add_argument("--replication", type=int, default=0)
    simulate.set_defaults(handler=handle_simulate)

    fit = subparsers.add_parser("fit", help="fit one method on one dataset")
    _common_flags(fit)
    _data_flags(fit)
    fit.add_argument("--method", choices=[Method.ST.value, Method.TR.value, Method.HR.value], default="HR")
    fit.add_argument("--mode", choices=[m.value for m in SelectionMode if m != SelectionMode.ORACLE_BEST],
                     help="selection mode (default double_cv for HR, gcv otherwise)")
    fit.add_argument("--r", type=int, help="fixed r (mode fixed)")
    fit.add_argument("--rho", type=float, help="fixed absolute rho (mode fixed)")
    fit.set_defaults(handler=handle_fit)

    mc = subparsers.add_parser("mc-bench", help="Monte-Carlo MSE table")
    _common_flags(mc)
    _replication_flags(mc)
    mc.set_defaults(handler=handle_mc_bench)

    sweep = subparsers.add_parser("rho-sweep", help="MSE curves along a rho grid")
    _common_flags(sweep)
    _replication_flags(sweep)
    sweep.add_argument("--r-values", type=int, nargs="+", help="r values (0 is Tikhonov)")
    sweep.add_argument("--rho-grid", type=float, nargs="+", help="rho grid in the configured scale")
    sweep.set_defaults(handler=handle_rho_sweep)

    predict = subparsers.add_parser("predict-split", help="prediction error over random splits")
    _common_flags(predict)
    _data_flags(predict)
    _replication_flags(predict)
    predict.add_argument("--splits", type=int, help="number of random splits")
    predict.add_argument("--train-frac", type=float, help="training fraction (default 0.5)")
    predict.set_defaults(handler=handle_predict_split)

    oracle = subparsers.add_parser("oracle-mse", help="closed-form oracle MSEs for a design")
    _common_flags(oracle)
    oracle.set_defaults(handler=handle_oracle_mse)
