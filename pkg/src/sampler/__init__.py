"""MCMC sampling, convergence diagnostics and the fit pipeline."""
from .adaptation import BlockProposal
from .config import ChainConfig
from .convergence import ConvergenceReport, convergence_report, effective_sample_size, rhat
from .draws import PosteriorDraws
from .fitting import FitResult, dataset_digest, fit, fit_key
from .mcmc import BlockedLogDensity, CallableTarget, run_chains, run_single_chain, sample_target

__all__ = [
    'BlockProposal',
    'BlockedLogDensity',
    'CallableTarget',
    'ChainConfig',
    'ConvergenceReport',
    'FitResult',
    'PosteriorDraws',
    'convergence_report',
    'dataset_digest',
    'effective_sample_size',
    'fit',
    'fit_key',
    'rhat',
    'run_chains',
    'run_single_chain',
    'sample_target',
]
