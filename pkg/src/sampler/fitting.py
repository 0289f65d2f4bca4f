"""
Fit pipeline shared by the commands and the simulation study.
"""
import hashlib
import json
import time

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..model import Dataset, ModelParameters, ModelSpec, ParameterLayout
from .config import ChainConfig
from .convergence import ConvergenceReport, convergence_report
from .draws import PosteriorDraws
from .mcmc import run_chains


def dataset_digest(data: Dataset) -> str:
    """SHA-256 of the dataset arrays and metadata."""
    h = hashlib.sha256()
    for arr in (data.subject, data.time, data.response, data.censor, data.upper, data.covariates):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(json.dumps([list(data.covariate_names), data.transforms.model_dump()], sort_keys=True).encode())
    return h.hexdigest()


def fit_key(data: Dataset, spec: ModelSpec, cfg: ChainConfig) -> str:
    """Cache key of a fit."""
    payload = f"{dataset_digest(data)}|{spec.to_json()}|{cfg.model_dump_json()}"
    return "fit:" + hashlib.sha256(payload.encode()).hexdigest()


class FitResult(BaseModel):
    """Draws and diagnostics of one (kernel, p0) fit."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: ModelSpec
    chain_config: ChainConfig
    draws: PosteriorDraws
    report: ConvergenceReport
    n_subjects: int
    elapsed_seconds: float = 0.0

    @property
    def layout(self) -> ParameterLayout:
        return ParameterLayout(self.spec, self.n_subjects)

    @property
    def converged(self) -> bool:
        return self.report.converged

    def parameters(self, index: int) -> ModelParameters:
        """Constrained parameters of draw ``index``."""
        return self.layout.from_row(self.draws.values[index])

    def summary_dict(self, level: float = 0.95) -> dict:
        """Medians and central intervals of the fixed effects and error parameters."""
        frame = self.draws.summary(self.layout.summary_columns, level)
        return {
            "kernel": self.spec.kernel.value,
            "p0": self.spec.p0,
            "link": self.spec.link.value,
            "level": level,
            "parameters": {
                name: {"median": row["median"], "lower": row["lower"], "upper": row["upper"]}
                for name, row in frame.iterrows()
            },
            "max_rhat": None if np.isnan(self.report.max_rhat) else self.report.max_rhat,
            "converged": self.converged,
        }


def fit(
    data: Dataset,
    spec: ModelSpec,
    cfg: ChainConfig,
    workers: int = 1,
    cache=None,
) -> FitResult:
    """
    Run the sampler and diagnostics for one model.

    Args:
        data: Dataset
        spec: Model specification
        cfg: Chain settings
        workers: Maximum concurrent chains
        cache: Optional FitCache consulted before sampling

    Returns:
        FitResult (also stored in ``cache`` when given)
    """
    key = fit_key(data, spec, cfg) if cache is not None else None
    if cache is not None:
        cached = cache.get_fit(key)
        if cached is not None:
            logger.info(f"Reusing cached fit for {spec.label}")
            return cached

    logger.info(f"Fitting {spec.label} ({spec.link.value} link, {data.n_subjects} subjects)")
    start = time.perf_counter()
    draws = run_chains(data, spec, cfg, workers=workers)
    layout = ParameterLayout(spec, data.n_subjects)
    report = convergence_report(draws, layout.global_columns, cfg.rhat_threshold)
    result = FitResult(
        spec=spec,
        chain_config=cfg,
        draws=draws,
        report=report,
        n_subjects=data.n_subjects,
        elapsed_seconds=time.perf_counter() - start,
    )
    logger.info(
        f"Finished {spec.label} in {result.elapsed_seconds:.1f}s "
        f"(max R-hat {report.max_rhat:.3f}, converged={result.converged})"
    )
    if cache is not None:
        cache.set_fit(key, result)
    return result
