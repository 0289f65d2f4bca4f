"""
Replicate loop of the simulation study.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from ..distributions import KernelKind
from ..exceptions import InitializationError, NumericError
from ..model import ModelSpec
from ..sampler import ChainConfig, fit
from .metrics import MetricsRow, ReplicateEstimate, aggregate, metrics_table
from .scenario import SimScenario, default_grid, simulate

FULL_SCALE_REPS = 300


def _desk_chain() -> ChainConfig:
    """Sampler settings for one replicate fit at desk scale."""
    return ChainConfig(n_chains=2, n_warmup=1000, n_keep=1000)


def _full_scale_chain() -> ChainConfig:
    return ChainConfig(n_chains=4, n_warmup=2500, n_keep=2500)


class SimStudyConfig(BaseModel):
    """
    Scenario grid, models and sampler settings of a study.

    Replicate fits use ``chain``, or ``full_scale_chain`` together with
    ``FULL_SCALE_REPS`` replicates when ``full_scale`` is set. Neither
    follows the sampler settings of the analysis commands.
    """

    scenarios: List[SimScenario] = Field(default_factory=default_grid)
    n_reps: Optional[int] = Field(default=None, ge=1)
    full_scale: bool = False
    models: Tuple[KernelKind, ...] = (KernelKind.SL, KernelKind.SEP)
    kappa_lower: float = Field(default=0.01, gt=0.0)
    kappa_upper: float = Field(default=3.0, gt=0.0)
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    chain: ChainConfig = Field(default_factory=_desk_chain)
    full_scale_chain: ChainConfig = Field(default_factory=_full_scale_chain)

    def resolved_scenarios(self) -> List[SimScenario]:
        """Scenarios with the study-level replicate count applied."""
        reps = FULL_SCALE_REPS if self.full_scale else self.n_reps
        if reps is None:
            return list(self.scenarios)
        return [s.model_copy(update={"n_reps": reps}) for s in self.scenarios]

    def resolved_chain(self) -> ChainConfig:
        return self.full_scale_chain if self.full_scale else self.chain


def _replicate_job(args) -> List[ReplicateEstimate]:
    s, rep, seq, chain_cfg, models, bounds, level = args
    data_seq, fit_seq = seq.spawn(2)
    data = simulate(s, data_seq)
    cfg = chain_cfg.model_copy(update={"seed": int(fit_seq.generate_state(1)[0])})

    estimates = []
    for kind in models:
        spec = ModelSpec(kernel=kind, p0=s.p0).with_uniform_kappa(*bounds)
        try:
            result = fit(data, spec, cfg)
            summary = result.draws.summary(list(s.truth), level)
            converged = result.converged
        except (InitializationError, NumericError) as e:
            logger.warning(f"{s.label} rep {rep} {kind.value}: fit failed ({e})")
            summary, converged = None, False
        for parameter in s.truth:
            row = summary.loc[parameter] if summary is not None else None
            estimates.append(ReplicateEstimate(
                rep=rep,
                model=kind.value,
                parameter=parameter,
                median=float(row["median"]) if row is not None else np.nan,
                lower=float(row["lower"]) if row is not None else np.nan,
                upper=float(row["upper"]) if row is not None else np.nan,
                converged=converged,
                censored_share=data.censored_share,
            ))
    return estimates


def run_scenario(
    s: SimScenario,
    chain_cfg: ChainConfig,
    models: Sequence[KernelKind] = (KernelKind.SL, KernelKind.SEP),
    workers: int = 1,
    kappa_bounds: Tuple[float, float] = (0.01, 3.0),
    level: float = 0.95,
) -> Tuple[List[MetricsRow], List[ReplicateEstimate]]:
    """
    Fit every model to every replicate of a scenario.

    Args:
        s: Scenario
        chain_cfg: Sampler settings; the seed is replaced per replicate
        models: Kernels to fit
        workers: Replicates run concurrently
        kappa_bounds: Uniform prior support of the tail shapes
        level: Credible interval probability

    Returns:
        (metrics rows, replicate estimates); non-converged replicates are
        excluded from the metrics and counted
    """
    models = tuple(KernelKind(m) for m in models)
    jobs = [
        (s, rep, seq, chain_cfg, models, kappa_bounds, level)
        for rep, seq in enumerate(s.replicate_seeds())
    ]
    logger.info(f"Scenario {s.label}: {s.n_reps} replicates x {len(models)} models")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_replicate_job, jobs))
    else:
        parts = [_replicate_job(job) for job in jobs]
    estimates = [e for part in parts for e in part]

    rows = aggregate(s, estimates)
    for row in rows:
        if row.n_excluded:
            logger.warning(
                f"Scenario {s.label}: {row.n_excluded} {row.model} replicate(s) excluded for {row.parameter}"
            )
    return rows, estimates


def run_study(
    cfg: SimStudyConfig,
    workers: int = 1,
    out_path: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """
    Run every scenario and build the metrics table.

    Args:
        cfg: Study configuration
        workers: Replicates run concurrently
        out_path: Optional CSV destination

    Returns:
        Wide metrics table
    """
    rows: List[MetricsRow] = []
    chain_cfg = cfg.resolved_chain()
    logger.info(
        f"Replicate fits: {chain_cfg.n_chains} chains x {chain_cfg.n_warmup} warm-up + {chain_cfg.n_keep} kept"
    )
    for s in cfg.resolved_scenarios():
        scenario_rows, _ = run_scenario(
            s, chain_cfg, cfg.models, workers, (cfg.kappa_lower, cfg.kappa_upper), cfg.level,
        )
        rows.extend(scenario_rows)
    table = metrics_table(rows, [m.value for m in cfg.models])
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(out_path, index=False)
        logger.info(f"Wrote simulation metrics to {out_path}")
    return table
