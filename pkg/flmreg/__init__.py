# flmreg/__init__.py
"""Spectral truncation, Tikhonov and hybrid regularisation for scalar-on-function regression"""

__version__ = "0.1.0"
