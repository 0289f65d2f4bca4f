"""
Adaptive random-walk proposals for one sampler block.

During warmup the log step size follows a Robbins-Monro recursion toward the
target acceptance rate and the proposal covariance is replaced by the running
empirical covariance of the block. After warmup both are frozen.
"""
import math

import numpy as np
from loguru import logger


class BlockProposal:
    """Gaussian random-walk proposal with warmup-only adaptation."""

    def __init__(
        self,
        size: int,
        target_accept: float,
        initial_step: float = 0.1,
        cov_adapt_start: int = 200,
        cov_update_every: int = 50,
    ):
        """
        Initialize the proposal.

        Args:
            size: Block dimension
            target_accept: Acceptance rate the step size is tuned toward
            initial_step: Initial per-coordinate proposal standard deviation
            cov_adapt_start: Warmup iterations before the empirical
                covariance is used
            cov_update_every: Refresh interval of the covariance factor
        """
        self.size = size
        self.target_accept = target_accept
        self.log_scale = math.log(2.38 / math.sqrt(size))
        self.cov_adapt_start = cov_adapt_start
        self.cov_update_every = cov_update_every
        self.chol = np.eye(size) * initial_step
        self.empirical = False

        self._n = 0
        self._mean = np.zeros(size)
        self._m2 = np.zeros((size, size))

        self.proposed = 0
        self.accepted = 0

    def propose(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.size)
        return x + math.exp(self.log_scale) * (self.chol @ z)

    def record(self, accepted: bool) -> None:
        """Count a retained-phase decision."""
        self.proposed += 1
        self.accepted += int(accepted)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else math.nan

    def adapt(self, iteration: int, accept_prob: float, x: np.ndarray) -> None:
        """
        Warmup update after one Metropolis step.

        Args:
            iteration: Zero-based warmup iteration
            accept_prob: min(1, acceptance ratio) of the step
            x: Block state after the step
        """
        self.log_scale += (iteration + 1) ** -0.6 * (accept_prob - self.target_accept)

        # Welford update of the running moments
        self._n += 1
        delta = x - self._mean
        self._mean += delta / self._n
        self._m2 += np.outer(delta, x - self._mean)

        if (
            self._n >= self.cov_adapt_start
            and self._n % self.cov_update_every == 0
            and np.all(np.diag(self._m2) > 0.0)
        ):
            cov = self._m2 / (self._n - 1) + 1e-8 * np.eye(self.size)
            try:
                self.chol = np.linalg.cholesky(cov)
                if not self.empirical:
                    # restart the step size on the matched covariance
                    self.log_scale = math.log(2.38 / math.sqrt(self.size))
                    self.empirical = True
            except np.linalg.LinAlgError:
                logger.debug("Empirical proposal covariance not positive definite; keeping previous factor")
