"""Bridge sampling and model comparison."""
from .bridge_sampler import (
    BridgeConfig,
    BridgeResult,
    NormalProposal,
    bridge_iterate,
    bridge_log_ml,
    estimate_log_marginal_likelihood,
    evaluate_log_density,
    fit_proposal,
    split_halves,
)
from .comparison import COMPARISON_COLUMNS, compare_models, evidence_label

__all__ = [
    'BridgeConfig',
    'BridgeResult',
    'COMPARISON_COLUMNS',
    'NormalProposal',
    'bridge_iterate',
    'bridge_log_ml',
    'compare_models',
    'estimate_log_marginal_likelihood',
    'evaluate_log_density',
    'evidence_label',
    'fit_proposal',
    'split_halves',
]
