# flmreg/core/config.py
"""Process settings read from the environment (and an optional .env file)"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()


class Settings(BaseModel):
    """Runtime settings; experiment parameters live in ExperimentConfig instead"""
    log_level: str = Field("INFO")
    workers: int = Field(1, ge=1)
    output_dir: str = Field("./results")
    failure_budget: float = Field(0.01, ge=0.0, le=1.0)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Get settings from FLMREG_* environment variables"""
    return Settings(
        log_level=os.getenv("FLMREG_LOG_LEVEL", "INFO"),
        workers=int(os.getenv("FLMREG_WORKERS", "1")),
        output_dir=os.getenv("FLMREG_OUTPUT_DIR", "./results"),
        failure_budget=float(os.getenv("FLMREG_FAILURE_BUDGET", "0.01")),
    )
