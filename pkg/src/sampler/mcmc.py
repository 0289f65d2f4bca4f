"""
Adaptive random-walk Metropolis-within-Gibbs.

Each chain is strictly sequential with its own generator; chains run in a
process pool when more than one worker is allowed and are merged by chain
index, so draws do not depend on scheduling.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from ..exceptions import InitializationError
from ..model import Block, BlockKind, Dataset, ModelSpec, QMMPosterior
from .adaptation import BlockProposal
from .config import ChainConfig
from .draws import PosteriorDraws


class BlockedLogDensity(Protocol):
    """What the sampler needs from a target."""

    @property
    def dim(self) -> int: ...

    def blocks(self, plan: str = "grouped") -> List[Block]: ...

    def log_density(self, u: np.ndarray) -> float: ...

    def block_log_density(self, u: np.ndarray, block: Block) -> float: ...

    def find_start(self, rng: np.random.Generator, jitter: float, attempts: int) -> np.ndarray: ...


class CallableTarget:
    """Adapter turning a plain log-density function into a sampler target."""

    def __init__(self, log_density: Callable[[np.ndarray], float], start: Sequence[float]):
        """
        Initialize the adapter.

        Args:
            log_density: Unnormalized log density on R^d
            start: Starting point; jittered per chain
        """
        self._fn = log_density
        self.start = np.asarray(start, dtype=float)

    @property
    def dim(self) -> int:
        return int(self.start.size)

    def blocks(self, plan: str = "grouped") -> List[Block]:
        return [Block(name="joint", kind=BlockKind.JOINT, indices=tuple(range(self.dim)))]

    def log_density(self, u: np.ndarray) -> float:
        return float(self._fn(u))

    def block_log_density(self, u: np.ndarray, block: Block) -> float:
        return self.log_density(u)

    def find_start(self, rng: np.random.Generator, jitter: float, attempts: int) -> np.ndarray:
        for _ in range(max(attempts, 1)):
            u = self.start + rng.normal(0.0, jitter, size=self.dim) if jitter > 0 else self.start.copy()
            if math.isfinite(self.log_density(u)):
                return u
        raise InitializationError("log density is -inf at all starting points", component="target")


class ChainResult(BaseModel):
    """Output of one chain."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    draws: np.ndarray
    log_posterior: np.ndarray
    acceptance: dict


def run_single_chain(
    target: BlockedLogDensity,
    cfg: ChainConfig,
    index: int,
    seed: np.random.SeedSequence,
) -> ChainResult:
    """
    Run one chain.

    Subject blocks are accepted on their local density and the running log
    posterior is updated by the local difference; every other block is
    accepted on the full log posterior.

    Args:
        target: Log density with block structure
        cfg: Chain settings
        index: Chain index
        seed: Seed sequence of this chain

    Returns:
        Retained unconstrained draws, log posteriors and acceptance rates
    """
    rng = np.random.default_rng(seed)
    u = target.find_start(rng, cfg.init_jitter, cfg.init_attempts)
    lp = target.log_density(u)
    blocks = target.blocks(cfg.block_plan)
    proposals = [
        BlockProposal(
            b.size,
            cfg.target_accept_scalar if b.size == 1 else cfg.target_accept_multi,
            cfg.initial_step,
            cfg.cov_adapt_start,
            cfg.cov_update_every,
        )
        for b in blocks
    ]

    kept = np.empty((cfg.n_keep, target.dim))
    kept_lp = np.empty(cfg.n_keep)
    n_kept = 0
    for it in range(cfg.n_iterations):
        warmup = it < cfg.n_warmup
        for block, proposal in zip(blocks, proposals):
            idx = list(block.indices)
            candidate = u.copy()
            candidate[idx] = proposal.propose(u[idx], rng)
            if block.kind == BlockKind.SUBJECT:
                current = target.block_log_density(u, block)
                proposed = target.block_log_density(candidate, block)
                log_alpha = proposed - current
                new_lp = lp + log_alpha
            else:
                new_lp = target.log_density(candidate)
                log_alpha = new_lp - lp
            if math.isnan(log_alpha):
                log_alpha = -math.inf
            accepted = math.log(rng.random()) < log_alpha
            if accepted:
                u, lp = candidate, new_lp
            if warmup:
                proposal.adapt(it, math.exp(min(0.0, log_alpha)), u[idx])
            else:
                proposal.record(accepted)

        if warmup and it + 1 == cfg.n_warmup:
            logger.debug(
                f"Chain {index}: warmup done, step scales "
                f"{[round(math.exp(p.log_scale), 4) for p in proposals[:4]]}"
            )
        if not warmup and (it - cfg.n_warmup + 1) % cfg.thin == 0:
            lp = target.log_density(u)
            kept[n_kept] = u
            kept_lp[n_kept] = lp
            n_kept += 1

    acceptance = {b.name: p.acceptance_rate for b, p in zip(blocks, proposals)}
    return ChainResult(index=index, draws=kept, log_posterior=kept_lp, acceptance=acceptance)


def _chain_job(args: Tuple[BlockedLogDensity, ChainConfig, int, np.random.SeedSequence]) -> ChainResult:
    return run_single_chain(*args)


def sample_target(
    target: BlockedLogDensity,
    cfg: ChainConfig,
    workers: int = 1,
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    names: Optional[List[str]] = None,
) -> PosteriorDraws:
    """
    Run all chains on a target and merge them.

    Args:
        target: Log density with block structure
        cfg: Chain settings
        workers: Maximum concurrent chains (1 runs inline)
        transform: Maps an unconstrained vector to the reported row
        names: Column names of the reported rows

    Returns:
        Merged draws
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_chains)
    jobs = [(target, cfg, i, seeds[i]) for i in range(cfg.n_chains)]
    logger.info(f"Sampling {cfg.n_chains} chain(s) x {cfg.n_warmup} warmup + {cfg.n_keep} kept, dim {target.dim}")
    if workers > 1 and cfg.n_chains > 1:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.n_chains)) as pool:
            results = list(pool.map(_chain_job, jobs))
    else:
        results = [_chain_job(job) for job in jobs]
    results.sort(key=lambda r: r.index)

    unconstrained = np.vstack([r.draws for r in results])
    transform = transform or (lambda x: x)
    values = np.vstack([transform(x) for x in unconstrained])
    names = names or [f"x[{k + 1}]" for k in range(values.shape[1])]
    acceptance = {name: [r.acceptance[name] for r in results] for name in results[0].acceptance}
    return PosteriorDraws(
        names=names,
        values=values,
        unconstrained=unconstrained,
        log_posterior=np.concatenate([r.log_posterior for r in results]),
        chain=np.repeat(np.arange(cfg.n_chains), cfg.n_keep),
        acceptance=acceptance,
    )


def run_chains(data: Dataset, spec: ModelSpec, cfg: ChainConfig, workers: int = 1) -> PosteriorDraws:
    """
    Sample the posterior of the quantile mixed model.

    Deterministic given ``(data, spec, cfg.seed)``; warmup draws are
    discarded and adaptation is frozen after warmup.

    Args:
        data: Dataset
        spec: Model specification
        cfg: Chain settings
        workers: Maximum concurrent chains

    Returns:
        Posterior draws with constrained columns named per the layout

    Raises:
        InitializationError: If no finite starting point is found
    """
    target = QMMPosterior(data, spec)
    layout = target.layout
    return sample_target(
        target,
        cfg,
        workers=workers,
        transform=lambda x: layout.to_row(layout.constrain(x)[0]),
        names=layout.column_names,
    )
