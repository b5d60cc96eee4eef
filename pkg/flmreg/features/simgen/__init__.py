# flmreg/features/simgen/__init__.py
"""Simulation designs: cosine Karhunen-Loeve curves, slope functions and noise"""

from .schemas import SimDesign
from .service import (
    kl_basis,
    gamma_sequence,
    beta_coefficients,
    true_beta,
    design_grid,
    draw_dataset,
    add_measurement_error,
    population_split,
    population_model,
)

__all__ = [
    "SimDesign",
    "kl_basis",
    "gamma_sequence",
    "beta_coefficients",
    "true_beta",
    "design_grid",
    "draw_dataset",
    "add_measurement_error",
    "population_split",
    "population_model",
]
