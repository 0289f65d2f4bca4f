"""
Prior densities for the fixed effects, error parameters and random effects.
"""
import math
from enum import Enum
from typing import Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..exceptions import DomainError
from ..numerics import LOG_2PI, log_gamma

ArrayLike = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)


class KappaPriorKind(str, Enum):
    """Prior families for the SEP tail shapes."""
    HALF_T = "half_t"
    UNIFORM = "uniform"


class KappaPrior(BaseModel):
    """Half-t or bounded uniform prior on each tail shape."""

    kind: KappaPriorKind = KappaPriorKind.HALF_T
    df: float = Field(default=3.0, gt=0.0)
    scale: float = Field(default=SQRT2, gt=0.0)
    lower: float = Field(default=0.01, ge=0.0)
    upper: float = Field(default=3.0, gt=0.0)

    @model_validator(mode="after")
    def _check_support(self) -> "KappaPrior":
        if self.kind == KappaPriorKind.UNIFORM and not self.lower < self.upper:
            raise ValueError("uniform kappa prior needs lower < upper")
        return self

    @classmethod
    def uniform(cls, lower: float, upper: float) -> "KappaPrior":
        return cls(kind=KappaPriorKind.UNIFORM, lower=lower, upper=upper)

    def logpdf(self, kappa: float) -> float:
        if self.kind == KappaPriorKind.UNIFORM:
            return uniform_logpdf(kappa, self.lower, self.upper)
        return half_t_logpdf(kappa, self.df, self.scale)


class PriorSpec(BaseModel):
    """Hyperparameters of the hierarchical model."""

    beta_variance: float = Field(default=1000.0, gt=0.0)
    offdiag_variance: float = Field(default=1000.0, gt=0.0)
    scale_df: float = Field(default=3.0, gt=0.0)
    scale_scale: float = Field(default=SQRT2, gt=0.0)
    kappa: KappaPrior = Field(default_factory=KappaPrior)


def normal_logpdf(x: ArrayLike, variance: float) -> ArrayLike:
    """Centered normal log density."""
    x = np.asarray(x, dtype=float)
    out = -0.5 * (LOG_2PI + math.log(variance)) - 0.5 * x * x / variance
    return float(out) if out.ndim == 0 else out


def half_t_logpdf(x: ArrayLike, df: float = 3.0, scale: float = SQRT2) -> ArrayLike:
    """
    Half Student-t log density on ``x >= 0``; ``-inf`` below zero.

    Twice the density of a centered t with ``df`` degrees of freedom and
    scale ``scale``.
    """
    x = np.asarray(x, dtype=float)
    const = (
        math.log(2.0)
        + log_gamma(0.5 * (df + 1.0))
        - log_gamma(0.5 * df)
        - 0.5 * math.log(df * math.pi)
        - math.log(scale)
    )
    z = x / scale
    out = np.where(x >= 0.0, const - 0.5 * (df + 1.0) * np.log1p(z * z / df), -np.inf)
    return float(out) if out.ndim == 0 else out


def uniform_logpdf(x: ArrayLike, lower: float, upper: float) -> ArrayLike:
    """Log density of Uniform(lower, upper); ``-inf`` outside the support."""
    x = np.asarray(x, dtype=float)
    out = np.where((x >= lower) & (x <= upper), -math.log(upper - lower), -np.inf)
    return float(out) if out.ndim == 0 else out


def random_effects_logdensity(v: np.ndarray, lv: np.ndarray) -> ArrayLike:
    """
    Log density of ``v ~ N(0, Sigma_v)`` with ``Sigma_v^-1 = L L^T``.

    Args:
        v: One vector of shape (q,) or stacked rows of shape (n, q)
        lv: Lower-triangular precision Cholesky factor with positive diagonal

    Returns:
        ``sum(log diag L) - q/2 log(2 pi) - 1/2 ||L^T v||^2`` per row
    """
    lv = np.asarray(lv, dtype=float)
    v = np.asarray(v, dtype=float)
    q = lv.shape[0]
    if v.shape[-1] != q:
        raise DomainError(f"random effect has dimension {v.shape[-1]}, expected {q}")
    z = v @ lv
    out = np.sum(np.log(np.diag(lv))) - 0.5 * q * LOG_2PI - 0.5 * np.sum(z * z, axis=-1)
    return float(out) if np.ndim(out) == 0 else out
