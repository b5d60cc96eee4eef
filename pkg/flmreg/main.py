# flmreg/main.py
"""Command-line entry point for the benchmark harness"""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from flmreg import __version__
from flmreg.core.config import get_settings
from flmreg.core.exceptions import ConfigurationError, FlmRegException, IngestionError, RunError
from flmreg.core.logging import configure_logging
from flmreg.features.bench.dao import BenchDAO
from flmreg.features.bench.router import register as register_bench
from flmreg.features.bench.service import BenchService

logger = logging.getLogger("flmreg.main")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INGESTION = 3
EXIT_RUN = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flmreg",
        description="Hybrid-regularised functional linear regression: simulations and benchmarks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING (default FLMREG_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_bench(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    service = BenchService(get_settings(), BenchDAO())
    try:
        return args.handler(args, service)
    except (ConfigurationError, ValidationError) as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG
    except IngestionError as e:
        logger.error("ingestion error: %s", e)
        return EXIT_INGESTION
    except RunError as e:
        logger.error("run error: %s", e)
        return EXIT_RUN
    except FlmRegException as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
