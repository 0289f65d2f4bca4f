"""Posterior predictive residual diagnostics and population curves."""
from .residuals import (
    ResidualConfig,
    ResidualReport,
    residual_report,
    scaled_residuals,
    simulate_replicates,
    uniformity_test,
)
from .trajectory import population_band

__all__ = [
    'ResidualConfig',
    'ResidualReport',
    'population_band',
    'residual_report',
    'scaled_residuals',
    'simulate_replicates',
    'uniformity_test',
]
