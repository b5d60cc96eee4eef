# flmreg/features/fda_core/__init__.py
"""Discrete curves, the grid inner product and the empirical covariance spectrum"""

from .models import Grid, Curve, FunctionalDataset, CovSpectrum
from .service import (
    inner_product,
    norm,
    center,
    empirical_spectrum,
    weighted_eigenpairs,
    fourier_coeffs,
    reconstruct,
    n_components_for_variance,
)

__all__ = [
    "Grid",
    "Curve",
    "FunctionalDataset",
    "CovSpectrum",
    "inner_product",
    "norm",
    "center",
    "empirical_spectrum",
    "weighted_eigenpairs",
    "fourier_coeffs",
    "reconstruct",
    "n_components_for_variance",
]
