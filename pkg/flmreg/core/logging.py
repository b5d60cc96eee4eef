# flmreg/core/logging.py
"""Logging setup for the command-line entry point"""

import logging
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stream handler on the flmreg logger"""
    from .config import get_settings

    level_name = (level or get_settings().log_level).upper()
    root = logging.getLogger("flmreg")
    root.setLevel(level_name)
    if not any(getattr(h, "_flmreg", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._flmreg = True
        root.addHandler(handler)
