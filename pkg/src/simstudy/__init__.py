"""Simulation study: data generation, censoring, replicate fits and metrics."""
from .metrics import MetricsRow, ReplicateEstimate, aggregate, metrics_table
from .runner import FULL_SCALE_REPS, SimStudyConfig, run_scenario, run_study
from .scenario import SimScenario, apply_censoring, default_grid, generate_dataset, simulate

__all__ = [
    'FULL_SCALE_REPS',
    'MetricsRow',
    'ReplicateEstimate',
    'SimScenario',
    'SimStudyConfig',
    'aggregate',
    'apply_censoring',
    'default_grid',
    'generate_dataset',
    'metrics_table',
    'run_scenario',
    'run_study',
    'simulate',
]
