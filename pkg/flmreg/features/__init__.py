# flmreg/features/__init__.py
"""Features module - one package per concern of the library and harness"""

# Available features:
# - fda_core: grids, curves, the grid inner product and the empirical spectrum
# - estimators: spectral truncation, Tikhonov, hybrid and oracle fits
# - selection: condition-index rule, GCV, K-fold and double cross-validation
# - analytic_mse: closed-form oracle MSE expansions
# - simgen: seeded simulation designs
# - bench: Monte-Carlo studies, split prediction, result IO and the CLI subcommands
