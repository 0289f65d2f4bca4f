"""
Marginal likelihood by iterative bridge sampling.

The posterior draws of each chain are split in half: the first halves fit a
moment-matched normal proposal, the second halves enter the fixed-point
iteration together with an equal number of proposal draws.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from ..exceptions import DomainError, NumericError
from ..sampler import PosteriorDraws

LogDensity = Callable[[np.ndarray], float]


class BridgeConfig(BaseModel):
    """Fixed-point settings."""

    tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=1000, ge=1)
    seed: int = Field(default=20240602, ge=0)
    workers: int = Field(default=1, ge=1)


class BridgeResult(BaseModel):
    """Outcome of one bridge-sampling run."""

    log_ml: float
    iterations: int
    converged: bool
    n_proposal_draws: int
    n_posterior_draws: int
    jitter: float = 0.0

    def to_dict(self) -> dict:
        out = self.model_dump()
        if not math.isfinite(self.log_ml):
            out["log_ml"] = None
        return out


class NormalProposal(BaseModel):
    """Multivariate normal proposal stored through its Cholesky factor."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray
    chol: np.ndarray
    jitter: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    @property
    def covariance(self) -> np.ndarray:
        return self.chol @ self.chol.T

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        z = solve_triangular(self.chol, (x - self.mean).T, lower=True)
        log_det = float(np.sum(np.log(np.diag(self.chol))))
        return -0.5 * np.sum(z * z, axis=0) - log_det - 0.5 * self.dim * math.log(2.0 * math.pi)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ self.chol.T


def fit_proposal(points: np.ndarray, max_tries: int = 12) -> NormalProposal:
    """
    Moment-match a normal proposal to ``points``.

    Args:
        points: (n, dim) unconstrained draws
        max_tries: Jitter escalations before giving up

    Returns:
        NormalProposal; ``jitter`` is the diagonal load that was needed

    Raises:
        DomainError: With fewer than 2*dim points or if no jitter helps
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, dim = points.shape
    if n < 2 * dim:
        raise DomainError(f"need at least {2 * dim} draws to fit a {dim}-dimensional proposal, got {n}")
    mean = points.mean(axis=0)
    cov = np.atleast_2d(np.cov(points, rowvar=False))

    jitter = 0.0
    base = float(np.mean(np.diag(cov)))
    base = base * 1e-10 if base > 0.0 else 1e-10
    for attempt in range(max_tries):
        try:
            chol = np.linalg.cholesky(cov + jitter * np.eye(dim))
            if jitter > 0.0:
                logger.warning(f"Proposal covariance not positive definite; added jitter {jitter:.3g}")
            return NormalProposal(mean=mean, chol=chol, jitter=jitter)
        except np.linalg.LinAlgError:
            jitter = base * 10.0 ** attempt
    raise DomainError("proposal covariance could not be made positive definite")


def split_halves(draws: Union[PosteriorDraws, np.ndarray], chain: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split every chain into a proposal-fitting half and a bridge half.

    Args:
        draws: PosteriorDraws (unconstrained vectors are used) or an (n, dim) array
        chain: Chain index per row when ``draws`` is an array

    Returns:
        (fit_half, bridge_half)
    """
    if isinstance(draws, PosteriorDraws):
        points, chain = draws.unconstrained, draws.chain
    else:
        points = np.atleast_2d(np.asarray(draws, dtype=float))
        chain = np.zeros(points.shape[0], dtype=int) if chain is None else np.asarray(chain)
    first, second = [], []
    for c in np.unique(chain):
        rows = points[chain == c]
        half = rows.shape[0] // 2
        first.append(rows[:half])
        second.append(rows[half:2 * half])
    return np.vstack(first), np.vstack(second)


def _safe_eval(fn: LogDensity, x: np.ndarray) -> float:
    try:
        value = float(fn(x))
    except NumericError:
        return -math.inf
    return -math.inf if math.isnan(value) else value


def _eval_chunk(args: Tuple[LogDensity, np.ndarray]) -> np.ndarray:
    fn, points = args
    return np.array([_safe_eval(fn, x) for x in points])


def evaluate_log_density(fn: LogDensity, points: np.ndarray, workers: int = 1) -> np.ndarray:
    """``fn`` at each row of ``points``; NaN and NumericError become -inf."""
    if workers <= 1 or points.shape[0] < 2 * workers:
        return _eval_chunk((fn, points))
    chunks = np.array_split(points, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_eval_chunk, [(fn, c) for c in chunks]))
    return np.concatenate(parts)


def _log_mean_exp(x: np.ndarray) -> float:
    return float(logsumexp(x) - math.log(x.size))


def bridge_iterate(l1: np.ndarray, l2: np.ndarray, tol: float = 1e-10, max_iter: int = 1000) -> Tuple[float, int, bool]:
    """
    Optimal-bridge fixed point on log density ratios.

    Args:
        l1: log p~ - log g at the posterior draws
        l2: log p~ - log g at the proposal draws
        tol: Convergence tolerance on successive log estimates
        max_iter: Iteration cap

    Returns:
        (log estimate, iterations, converged)
    """
    n1, n2 = l1.size, l2.size
    log_s1 = math.log(n1 / (n1 + n2))
    log_s2 = math.log(n2 / (n1 + n2))
    shift = float(np.median(l1))
    l1 = l1 - shift
    l2 = l2 - shift

    log_r = 0.0
    for it in range(1, max_iter + 1):
        num = _log_mean_exp(l2 - np.logaddexp(log_s1 + l2, log_s2 + log_r))
        den = _log_mean_exp(-np.logaddexp(log_s1 + l1, log_s2 + log_r))
        new = num - den
        if not math.isfinite(new):
            return new + shift, it, False
        if abs(new - log_r) < tol:
            return new + shift, it, True
        log_r = new
    return log_r + shift, max_iter, False


def bridge_log_ml(
    posterior_half: np.ndarray,
    proposal: NormalProposal,
    log_posterior_fn: LogDensity,
    tol: float = 1e-10,
    max_iter: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> BridgeResult:
    """
    Log marginal likelihood from posterior draws and a fitted proposal.

    Args:
        posterior_half: (n1, dim) draws not used to fit ``proposal``
        proposal: Normal proposal
        log_posterior_fn: Unnormalized log posterior on the unconstrained scale
        tol: Convergence tolerance on log r
        max_iter: Iteration cap
        seed: Seed of the proposal draws
        workers: Processes used for density evaluations

    Returns:
        BridgeResult, flagged when the iteration did not converge
    """
    posterior_half = np.atleast_2d(np.asarray(posterior_half, dtype=float))
    n1 = posterior_half.shape[0]
    rng = np.random.default_rng(seed)
    proposal_draws = proposal.sample(n1, rng)

    l1 = evaluate_log_density(log_posterior_fn, posterior_half, workers) - proposal.logpdf(posterior_half)
    l2 = evaluate_log_density(log_posterior_fn, proposal_draws, workers) - proposal.logpdf(proposal_draws)

    log_ml, iterations, converged = bridge_iterate(l1, l2, tol, max_iter)
    result = BridgeResult(
        log_ml=log_ml,
        iterations=iterations,
        converged=converged,
        n_proposal_draws=int(proposal_draws.shape[0]),
        n_posterior_draws=n1,
        jitter=proposal.jitter,
    )
    if converged:
        logger.info(f"Bridge sampling converged in {iterations} iterations: log ML {log_ml:.3f}")
    else:
        logger.warning(f"Bridge sampling did not converge after {iterations} iterations (log ML {log_ml:.3f})")
    return result


def estimate_log_marginal_likelihood(
    draws: PosteriorDraws,
    log_posterior_fn: LogDensity,
    cfg: Optional[BridgeConfig] = None,
) -> BridgeResult:
    """
    Split-half bridge sampling over a fit's unconstrained draws.

    Args:
        draws: Posterior draws
        log_posterior_fn: Unnormalized log posterior matching ``draws.unconstrained``
        cfg: Bridge settings

    Returns:
        BridgeResult
    """
    cfg = cfg or BridgeConfig()
    fit_half, bridge_half = split_halves(draws)
    proposal = fit_proposal(fit_half)
    return bridge_log_ml(bridge_half, proposal, log_posterior_fn, cfg.tol, cfg.max_iter, cfg.seed, cfg.workers)
