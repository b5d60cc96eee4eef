# flmreg/shared/utils.py
"""Shared utility functions"""

import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .constants import DEFAULT_RHO_GRID_HIGH, DEFAULT_RHO_GRID_LOW, DEFAULT_RHO_GRID_SIZE


def log_grid(low: float, high: float, size: int) -> np.ndarray:
    """Log-spaced grid from low to high inclusive"""
    if size == 1:
        return np.array([float(low)])
    return np.logspace(math.log10(low), math.log10(high), size)


def default_rho_grid(lambda1: float, size: int = DEFAULT_RHO_GRID_SIZE) -> np.ndarray:
    """40 log-spaced points from 1e-6*lambda1 to 10*lambda1"""
    return log_grid(DEFAULT_RHO_GRID_LOW * lambda1, DEFAULT_RHO_GRID_HIGH * lambda1, size)


def substream(seed: int, replication: int = 0, stream: int = 0) -> np.random.Generator:
    """Generator for one (replication, stream) pair of a root seed.

    Substreams are addressed by spawn key, so replication k can be regenerated
    without drawing replications 0..k-1 first.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(replication), int(stream)))
    return np.random.Generator(np.random.PCG64(sequence))


def derived_seed(seed: int, replication: int, stream: int) -> int:
    """Integer seed for code paths that take plain integer seeds"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=(int(replication), int(stream)))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def argmin_with_ties(entries: Sequence[Tuple[int, Optional[float], float]]) -> int:
    """Index of the smallest score; ties go to smaller r, then larger rho"""
    best = None
    best_key = None
    for index, (r, rho, score) in enumerate(entries):
        if not math.isfinite(score):
            continue
        key = (score, r, -(rho if rho is not None else 0.0))
        if best_key is None or key < best_key:
            best, best_key = index, key
    if best is None:
        raise ValueError("no finite score")
    return best


def mc_standard_error(values: Iterable[float]) -> float:
    """Sample SD over sqrt(count); zero when fewer than two values"""
    array = np.asarray(list(values), dtype=float)
    if array.size < 2:
        return 0.0
    return float(array.std(ddof=1) / math.sqrt(array.size))


def format_execution_time(time_ms: float, replications: Optional[int] = None) -> str:
    """Wall time as 850.0ms, 12.3s or 2m 5.0s, plus a per-replication figure when given"""
    minutes, seconds = divmod(time_ms / 1000.0, 60.0)
    if time_ms < 1000:
        text = f"{time_ms:.1f}ms"
    elif minutes < 1:
        text = f"{seconds:.1f}s"
    else:
        text = f"{int(minutes)}m {seconds:.1f}s"
    if replications:
        text += f" ({format_execution_time(time_ms / replications)}/rep)"
    return text
