"""
Helpers shared by the commands: data loading, cached fitting and metadata.
"""
import json
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from loguru import logger

from .. import __version__
from ..memory import FitCache
from ..model import Dataset, ModelSpec
from ..sampler import ChainConfig, FitResult, fit, fit_key
from .config import RunConfig

FitKey = Tuple[str, float]


def load_dataset(cfg: RunConfig) -> Dataset:
    """Read the input CSV with the configured transforms."""
    logger.info(f"Loading dataset {cfg.data.path}")
    data = Dataset.from_csv(cfg.data.path, cfg.data.transforms)
    logger.info(
        f"{data.n_obs} observations, {data.n_subjects} subjects, "
        f"{100 * data.censored_share:.1f}% censored"
    )
    return data


def command_dir(cfg: RunConfig, command: str) -> Path:
    path = Path(cfg.output_dir) / command
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fit_job(args: Tuple[Dataset, ModelSpec, ChainConfig]) -> FitResult:
    data, spec, chain = args
    return fit(data, spec, chain, workers=1)


def fit_models(cfg: RunConfig, data: Dataset) -> Dict[FitKey, FitResult]:
    """
    Fit every configured (kernel, quantile), reusing cached fits.

    The fit cache from ``cfg.cache`` is opened for the call and closed
    afterwards. Missing fits run concurrently (one process per fit) when
    several are needed and ``cfg.workers > 1``; a single missing fit runs its
    chains in parallel instead.

    Returns:
        FitResults keyed by (kernel, p0) in configuration order
    """
    with FitCache.from_config(cfg.cache) or nullcontext() as cache:
        return _fit_with_cache(cfg, data, cache)


def _fit_with_cache(cfg: RunConfig, data: Dataset, cache: Optional[FitCache]) -> Dict[FitKey, FitResult]:
    specs = cfg.model.specs(cfg.data.cd4_column)
    results: Dict[FitKey, FitResult] = {}
    missing: List[ModelSpec] = []
    for spec in specs:
        cached = cache.get_fit(fit_key(data, spec, cfg.sampler)) if cache is not None else None
        if cached is not None:
            logger.info(f"Reusing cached fit for {spec.label}")
            results[(spec.kernel.value, spec.p0)] = cached
        else:
            missing.append(spec)

    if len(missing) > 1 and cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(missing))) as pool:
            fitted = list(pool.map(_fit_job, [(data, spec, cfg.sampler) for spec in missing]))
    else:
        fitted = [fit(data, spec, cfg.sampler, workers=cfg.workers) for spec in missing]

    for spec, result in zip(missing, fitted):
        results[(spec.kernel.value, spec.p0)] = result
        if cache is not None:
            cache.set_fit(fit_key(data, spec, cfg.sampler), result)
    return {(s.kernel.value, s.p0): results[(s.kernel.value, s.p0)] for s in specs}


def write_metadata(out_dir: Path, command: str, cfg: RunConfig, data: Optional[Dataset] = None) -> Path:
    """Write ``run_metadata.json`` describing the run."""
    meta = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.model_dump(mode="json"),
    }
    if data is not None:
        meta["data"] = {
            "path": cfg.data.path,
            "n_obs": data.n_obs,
            "n_subjects": data.n_subjects,
            "censored_share": data.censored_share,
            "transforms": data.transforms.model_dump(),
        }
    path = out_dir / "run_metadata.json"
    path.write_text(json.dumps(meta, indent=2))
    return path
