"""
Data-generating process and censoring mechanism of the simulation study.
"""
import itertools
import math
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..distributions import KernelKind, QuantileLevel, kernel_registry
from ..exceptions import DomainError
from ..model import LEFT, Dataset, FixedEffects, link_linear

DEFAULT_CENSOR_FRACS = (0.05, 0.10)
DEFAULT_QUANTILES = (0.5, 0.8)
DEFAULT_TAILS = ((2.0, 0.5), (1.0, 1.0), (0.5, 2.0))


class SimScenario(BaseModel):
    """
    One cell of the simulation grid.

    ``re_cholesky`` is the Cholesky factor of the random-effects covariance
    used to generate data (subject SDs 3 and 1.5 by default).
    """

    model_config = ConfigDict(frozen=True)

    censor_frac: float = Field(gt=0.0, lt=1.0)
    p0: QuantileLevel
    kappa1: float = Field(gt=0.0)
    kappa2: float = Field(gt=0.0)
    n_subjects: int = Field(default=15, ge=1)
    times: Tuple[float, ...] = (-2.0, -1.0, 0.0, 1.0, 2.0)
    beta: Tuple[float, float] = (5.0, -0.25)
    sigma: float = Field(default=0.40, gt=0.0)
    re_cholesky: Tuple[Tuple[float, float], Tuple[float, float]] = ((3.0, 0.0), (0.0, 1.5))
    n_reps: int = Field(default=50, ge=1)
    seed: int = Field(default=2024, ge=0)

    @field_validator("times")
    @classmethod
    def _nonempty(cls, value):
        if len(value) == 0:
            raise ValueError("visit grid must not be empty")
        return value

    @model_validator(mode="after")
    def _check_factor(self) -> "SimScenario":
        factor = np.asarray(self.re_cholesky)
        if not np.allclose(factor, np.tril(factor)):
            raise ValueError("re_cholesky must be lower triangular")
        return self

    @property
    def truth(self) -> dict:
        return {"beta[1]": self.beta[0], "beta[2]": self.beta[1]}

    @property
    def label(self) -> str:
        return f"c{self.censor_frac:g}_p{self.p0:g}_k{self.kappa1:g}-{self.kappa2:g}"

    def replicate_seeds(self) -> List[np.random.SeedSequence]:
        """One seed sequence per replicate, fixed by the scenario seed."""
        return np.random.SeedSequence(self.seed).spawn(self.n_reps)


def default_grid(n_reps: int = 50, seed: int = 2024, **overrides) -> List[SimScenario]:
    """Two censoring levels x two quantiles x three tail pairs."""
    grid = []
    for i, (c, p0, (k1, k2)) in enumerate(itertools.product(DEFAULT_CENSOR_FRACS, DEFAULT_QUANTILES, DEFAULT_TAILS)):
        grid.append(SimScenario(
            censor_frac=c, p0=p0, kappa1=k1, kappa2=k2,
            n_reps=n_reps, seed=seed + i, **overrides,
        ))
    return grid


def generate_dataset(s: SimScenario, rep_seed) -> Dataset:
    """
    Uncensored dataset for one replicate.

    Args:
        s: Scenario
        rep_seed: Anything ``numpy.random.default_rng`` accepts

    Returns:
        Dataset with SEP errors at quantile ``s.p0``
    """
    rng = np.random.default_rng(rep_seed)
    n_visits = len(s.times)
    z = rng.standard_normal((s.n_subjects, 2))
    v = z @ np.asarray(s.re_cholesky).T

    subject = np.repeat(np.arange(s.n_subjects), n_visits)
    time = np.tile(np.asarray(s.times, dtype=float), s.n_subjects)
    mu = link_linear(time, FixedEffects(beta=np.asarray(s.beta)), v[subject])
    params = kernel_registry.get_kernel(KernelKind.SEP).make_params(
        np.asarray(mu), s.sigma, s.p0, s.kappa1, s.kappa2,
    )
    y = kernel_registry.get_kernel(KernelKind.SEP).sample(params, rng)
    return Dataset(
        subject=subject,
        time=time,
        response=np.atleast_1d(y),
        subject_labels=tuple(str(i + 1) for i in range(s.n_subjects)),
    )


def apply_censoring(data: Dataset, c: float) -> Dataset:
    """
    Left-censor the smallest responses at the empirical ``c`` quantile.

    The smallest ``ceil(c * n)`` responses are replaced by the bound and
    flagged left-censored.

    Args:
        data: Uncensored dataset
        c: Censoring fraction in (0, 1)

    Returns:
        Censored copy
    """
    if not 0.0 < c < 1.0:
        raise DomainError(f"censoring fraction must lie in (0, 1), got {c}")
    y = data.response.copy()
    n_cens = min(int(math.ceil(c * y.size - 1e-9)), y.size)
    bound = float(np.quantile(data.response, c))
    lowest = np.argsort(y, kind="stable")[:n_cens]
    censor = data.censor.copy()
    y[lowest] = bound
    censor[lowest] = LEFT
    return data.with_censoring(censor, y)


def simulate(s: SimScenario, rep_seed) -> Dataset:
    """Generate and censor one replicate."""
    return apply_censoring(generate_dataset(s, rep_seed), s.censor_frac)
