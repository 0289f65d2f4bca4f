"""sep-qmm - Bayesian quantile mixed models with SEP and skew-Laplace errors for censored longitudinal data."""

__version__ = "0.1.0"
__author__ = "sep-qmm developers"
