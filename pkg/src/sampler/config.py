"""
Sampler settings.
"""
from typing import Literal

from pydantic import BaseModel, Field, model_validator


class ChainConfig(BaseModel):
    """Chain lengths, seeding, blocking and adaptation targets."""

    n_chains: int = Field(default=4, ge=1)
    n_warmup: int = Field(default=5000, ge=0)
    n_keep: int = Field(default=5000, ge=1)
    thin: int = Field(default=1, ge=1)
    seed: int = Field(default=20240601, ge=0, lt=2**64)
    block_plan: Literal["grouped", "joint"] = "grouped"
    target_accept_multi: float = Field(default=0.234, gt=0.0, lt=1.0)
    target_accept_scalar: float = Field(default=0.44, gt=0.0, lt=1.0)
    initial_step: float = Field(default=0.1, gt=0.0)
    cov_adapt_start: int = Field(default=200, ge=1)
    cov_update_every: int = Field(default=50, ge=1)
    init_jitter: float = Field(default=0.1, ge=0.0)
    init_attempts: int = Field(default=20, ge=1)
    rhat_threshold: float = Field(default=1.1, gt=1.0)

    @model_validator(mode="after")
    def _check_lengths(self) -> "ChainConfig":
        if self.n_keep * self.thin <= 0:
            raise ValueError("n_keep * thin must be positive")
        return self

    @property
    def n_iterations(self) -> int:
        return self.n_warmup + self.n_keep * self.thin
