"""
Simulation-based scaled residuals for uncensored observations.

Replicates use fresh random effects drawn from each posterior draw's
random-effects distribution instead of the fitted subject effects.
"""
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import solve_triangular
from scipy.stats import kstest

from ..exceptions import DomainError
from ..model import Dataset, ModelSpec, ParameterLayout, cd4_values
from ..sampler import PosteriorDraws


class ResidualConfig(BaseModel):
    """Replicate count and seed for the residual simulation."""

    n_sims: int = Field(default=250, ge=1)
    seed: int = Field(default=20240603, ge=0)
    workers: int = Field(default=1, ge=1)


def _simulate_one(args) -> np.ndarray:
    row, layout, spec, data, cd4, seed = args
    rng = np.random.default_rng(seed)
    params = layout.from_row(row)
    z = rng.standard_normal((data.n_subjects, spec.q))
    # precision factor: v = L^-T z has covariance (L L^T)^-1
    v = solve_triangular(params.lv, z.T, lower=True, trans="T").T
    mu = spec.link_fn.evaluate(data.time, params.beta, v[data.subject], params.gamma, cd4)
    err = params.error_model(spec).params(np.atleast_1d(mu), validate=False)
    return np.asarray(spec.kernel_fn.sample(err, rng), dtype=float)


def simulate_replicates(
    draws: PosteriorDraws,
    data: Dataset,
    spec: ModelSpec,
    n_sims: int = 250,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """
    Posterior predictive replicate datasets.

    Args:
        draws: Posterior draws; ``n_sims`` evenly thinned draws are used
        data: Dataset supplying times, subjects and covariates
        spec: Model specification of the fit
        n_sims: Number of replicates
        seed: Root seed; each replicate gets its own spawned stream
        workers: Processes used to simulate

    Returns:
        (n_replicates, n_obs) matrix; censored rows are simulated as well
    """
    if draws.n_draws == 0:
        raise DomainError("no posterior draws to simulate from")
    layout = ParameterLayout(spec, data.n_subjects)
    index = draws.thinned_indices(n_sims)
    if index.size < n_sims:
        # fewer draws than replicates: cycle through them
        index = np.resize(index, n_sims)
    seeds = np.random.SeedSequence(seed).spawn(index.size)
    cd4 = cd4_values(data, spec)
    jobs = [(draws.values[i], layout, spec, data, cd4, s) for i, s in zip(index, seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(_simulate_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reps = [_simulate_one(job) for job in jobs]
    logger.debug(f"Simulated {len(reps)} replicate datasets of {data.n_obs} rows")
    return np.vstack(reps)


def scaled_residuals(observed: np.ndarray, replicates: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Randomized position of each observation within its replicates.

    Args:
        observed: (n_obs,) responses
        replicates: (n_sims, n_obs) simulated responses
        rng: Generator for the tie-breaking uniforms

    Returns:
        Residuals in [0, 1]
    """
    observed = np.asarray(observed, dtype=float)
    replicates = np.atleast_2d(replicates)
    if replicates.shape[1] != observed.size:
        raise DomainError(f"replicates have {replicates.shape[1]} columns for {observed.size} observations")
    n_sims = replicates.shape[0]
    below = np.sum(replicates < observed, axis=0)
    ties = np.sum(replicates == observed, axis=0)
    u = rng.random(observed.size)
    return (below + u * (ties + 1)) / (n_sims + 1)


def uniformity_test(residuals: np.ndarray) -> Tuple[float, float, np.ndarray]:
    """
    Kolmogorov-Smirnov test against Uniform(0, 1).

    Args:
        residuals: At least 10 residuals

    Returns:
        (statistic, asymptotic p-value, QQ points as an (n, 2) array of
        uniform plotting positions and sorted residuals)
    """
    r = np.asarray(residuals, dtype=float)
    if r.size < 10:
        raise DomainError(f"uniformity test needs at least 10 residuals, got {r.size}")
    result = kstest(r, "uniform", method="asymp")
    ordered = np.sort(r)
    positions = np.arange(1, r.size + 1) / (r.size + 1)
    return float(result.statistic), float(result.pvalue), np.column_stack([positions, ordered])


class ResidualReport(BaseModel):
    """Residuals of the uncensored rows and their uniformity test."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    rows: np.ndarray
    residuals: np.ndarray
    ks_statistic: float
    p_value: float
    qq: np.ndarray
    n_sims: int

    def residual_frame(self, data: Dataset) -> pd.DataFrame:
        labels = data.subject_labels or tuple(str(i) for i in range(data.n_subjects))
        return pd.DataFrame({
            "row": self.rows + 1,
            "subject": [labels[s] for s in data.subject[self.rows]],
            "time": data.time[self.rows],
            "response": data.response[self.rows],
            "residual": self.residuals,
        })

    def qq_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"uniform": self.qq[:, 0], "residual": self.qq[:, 1]})

    def summary(self) -> dict:
        return {
            "model": self.label,
            "n_residuals": int(self.residuals.size),
            "n_sims": self.n_sims,
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
        }

    def write(self, out_dir: Union[str, Path], data: Dataset) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [
            out_dir / f"residuals_{self.label}.csv",
            out_dir / f"qq_{self.label}.csv",
            out_dir / f"ks_{self.label}.json",
        ]
        self.residual_frame(data).to_csv(paths[0], index=False)
        self.qq_frame().to_csv(paths[1], index=False)
        paths[2].write_text(json.dumps(self.summary(), indent=2))
        return paths


def residual_report(
    draws: PosteriorDraws,
    data: Dataset,
    spec: ModelSpec,
    cfg: Optional[ResidualConfig] = None,
) -> ResidualReport:
    """
    Scaled residuals and KS uniformity for one fit.

    Args:
        draws: Posterior draws of the fit
        data: Dataset the fit used
        spec: Model specification of the fit
        cfg: Residual settings

    Returns:
        ResidualReport over the uncensored rows
    """
    cfg = cfg or ResidualConfig()
    replicates = simulate_replicates(draws, data, spec, cfg.n_sims, cfg.seed, cfg.workers)
    rows = np.flatnonzero(data.uncensored)
    rng = np.random.default_rng([cfg.seed, 1])
    residuals = scaled_residuals(data.response[rows], replicates[:, rows], rng)
    statistic, p_value, qq = uniformity_test(residuals)
    logger.info(f"Residuals for {spec.label}: KS {statistic:.4f}, p = {p_value:.4f} ({rows.size} rows)")
    return ResidualReport(
        label=spec.label,
        rows=rows,
        residuals=residuals,
        ks_statistic=statistic,
        p_value=p_value,
        qq=qq,
        n_sims=replicates.shape[0],
    )
