"""
Skew exponential power kernel with independent left and right tail shapes.

The location is the p0-th quantile: the left branch carries mass p0 and the
right branch mass 1 - p0. With both shapes equal to 2 and p0 = 0.5 the kernel
is normal with standard deviation sigma / sqrt(2 pi); with both shapes equal to
1 it is a skew Laplace kernel (see :func:`~.sl.sep_to_sl_scale`).
"""
import math
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import Field, model_validator

from ..exceptions import DomainError
from ..numerics import (
    inv_reg_lower_inc_gamma,
    log_gamma,
    log_reg_lower_inc_gamma,
    log_reg_upper_inc_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)
from .base import (
    ArrayLike,
    ErrorKernel,
    KernelKind,
    KernelParams,
    as_output,
    check_probability,
)


def sep_norm_constant(kappa: ArrayLike) -> ArrayLike:
    """
    Normalizing constant ``K = kappa^(-1/kappa) / (2 Gamma(1 + 1/kappa))``.

    Args:
        kappa: Tail shape(s), kappa > 0

    Returns:
        K for each shape

    Raises:
        DomainError: If kappa <= 0
    """
    k = np.asarray(kappa, dtype=float)
    if not np.all(k > 0.0):
        raise DomainError(f"tail shape must be positive, got {kappa!r}")
    out = np.exp(-np.log(k) / k - math.log(2.0) - log_gamma(1.0 + 1.0 / k))
    return as_output(out, kappa)


class SEPParams(KernelParams):
    """Location, scale, tail shapes and quantile level of the SEP kernel."""

    kappa1: float = Field(gt=0.0)
    kappa2: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_constants(self) -> "SEPParams":
        for name in ("k1", "k2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"normalizing constant {name} is not finite and positive")
        return self

    @property
    def k1(self) -> float:
        return sep_norm_constant(self.kappa1)

    @property
    def k2(self) -> float:
        return sep_norm_constant(self.kappa2)

    @property
    def left_width(self) -> float:
        """Scale of the left branch, ``2 p0 sigma K1``."""
        return 2.0 * self.p0 * self.sigma * self.k1

    @property
    def right_width(self) -> float:
        """Scale of the right branch, ``2 (1 - p0) sigma K2``."""
        return 2.0 * (1.0 - self.p0) * self.sigma * self.k2


def _gamma_args(y: ArrayLike, p: SEPParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(left, w1, w2)`` where ``w`` are the incomplete-gamma arguments."""
    d = np.asarray(y, dtype=float) - p.mu
    left = d <= 0.0
    with np.errstate(over="ignore"):
        w1 = (np.maximum(-d, 0.0) / p.left_width) ** p.kappa1 / p.kappa1
        w2 = (np.maximum(d, 0.0) / p.right_width) ** p.kappa2 / p.kappa2
    return left, w1, w2


def sep_logpdf(y: ArrayLike, p: SEPParams) -> ArrayLike:
    """
    Log density of the SEP kernel.

    Args:
        y: Response value(s)
        p: Kernel parameters

    Returns:
        Log density; equals ``-ln sigma`` at ``mu``
    """
    left, w1, w2 = _gamma_args(y, p)
    out = -math.log(p.sigma) - np.where(left, w1, w2)
    return as_output(out, y, p.mu)


def sep_logcdf(y: ArrayLike, p: SEPParams) -> ArrayLike:
    """Log CDF of the SEP kernel."""
    left, w1, w2 = _gamma_args(y, p)
    log_p0 = math.log(p.p0)
    left_branch = log_p0 + log_reg_upper_inc_gamma(w1, 1.0 / p.kappa1)
    right_branch = np.logaddexp(log_p0, math.log1p(-p.p0) + log_reg_lower_inc_gamma(w2, 1.0 / p.kappa2))
    return as_output(np.where(left, left_branch, right_branch), y, p.mu)


def sep_logsf(y: ArrayLike, p: SEPParams) -> ArrayLike:
    """Log survival function of the SEP kernel."""
    left, w1, w2 = _gamma_args(y, p)
    log_q0 = math.log1p(-p.p0)
    left_branch = np.logaddexp(log_q0, math.log(p.p0) + log_reg_lower_inc_gamma(w1, 1.0 / p.kappa1))
    right_branch = log_q0 + log_reg_upper_inc_gamma(w2, 1.0 / p.kappa2)
    return as_output(np.where(left, left_branch, right_branch), y, p.mu)


def sep_cdf(y: ArrayLike, p: SEPParams) -> ArrayLike:
    """
    CDF of the SEP kernel.

    The left branch is ``p0 * Q(w1, 1/kappa1)`` and the right branch
    ``p0 + (1 - p0) * G(w2, 1/kappa2)``, so ``F(mu) = p0`` exactly.
    """
    left, w1, w2 = _gamma_args(y, p)
    left_branch = p.p0 * reg_upper_inc_gamma(w1, 1.0 / p.kappa1)
    right_branch = p.p0 + (1.0 - p.p0) * reg_lower_inc_gamma(w2, 1.0 / p.kappa2)
    return as_output(np.where(left, left_branch, right_branch), y, p.mu)


def sep_quantile(u: ArrayLike, p: SEPParams) -> ArrayLike:
    """
    Inverse of :func:`sep_cdf` through the inverse incomplete gamma function.

    Args:
        u: Probability level(s) in (0, 1)
        p: Kernel parameters

    Returns:
        Quantile(s) of the kernel

    Raises:
        DomainError: If ``u`` lies outside (0, 1)
    """
    uu = check_probability(u)
    left = uu <= p.p0
    q_left = np.where(left, 1.0 - uu / p.p0, 0.0)
    q_right = np.where(left, 0.0, (uu - p.p0) / (1.0 - p.p0))
    w1 = inv_reg_lower_inc_gamma(q_left, 1.0 / p.kappa1)
    w2 = inv_reg_lower_inc_gamma(q_right, 1.0 / p.kappa2)
    y_left = p.mu - p.left_width * (p.kappa1 * w1) ** (1.0 / p.kappa1)
    y_right = p.mu + p.right_width * (p.kappa2 * w2) ** (1.0 / p.kappa2)
    return as_output(np.where(left, y_left, y_right), u, p.mu)


def sep_sample(
    p: SEPParams,
    rng: np.random.Generator,
    size: Optional[Union[int, Tuple[int, ...]]] = None,
) -> ArrayLike:
    """
    Draw from the SEP kernel with the gamma-variate construction.

    A side is chosen (left with probability p0), ``W ~ Gamma(1/kappa_side)``
    is drawn and ``eps = (kappa_side * W)^(1/kappa_side)`` is placed on that
    side of ``mu`` with the branch width.

    Args:
        p: Kernel parameters
        rng: Generator owned by the caller
        size: Output shape; defaults to the shape of ``p.mu``

    Returns:
        Random variate(s)
    """
    if size is None:
        size = np.shape(p.mu) or None
    left = rng.random(size) < p.p0
    w_left = rng.standard_gamma(1.0 / p.kappa1, size)
    w_right = rng.standard_gamma(1.0 / p.kappa2, size)
    eps_left = (p.kappa1 * w_left) ** (1.0 / p.kappa1)
    eps_right = (p.kappa2 * w_right) ** (1.0 / p.kappa2)
    out = np.where(left, p.mu - p.left_width * eps_left, p.mu + p.right_width * eps_right)
    return float(out) if size is None else np.asarray(out)


class SEPKernel(ErrorKernel):
    """Skew exponential power error kernel."""

    @property
    def kind(self) -> KernelKind:
        return KernelKind.SEP

    @property
    def shape_names(self) -> Tuple[str, ...]:
        return ("sigma", "kappa1", "kappa2")

    def make_params(self, mu, sigma, p0, kappa1=1.0, kappa2=1.0, validate=True) -> SEPParams:
        if validate:
            return SEPParams(mu=mu, sigma=sigma, p0=p0, kappa1=kappa1, kappa2=kappa2)
        return SEPParams.model_construct(mu=mu, sigma=sigma, p0=p0, kappa1=kappa1, kappa2=kappa2)

    def logpdf(self, y, params):
        return sep_logpdf(y, params)

    def cdf(self, y, params):
        return sep_cdf(y, params)

    def logcdf(self, y, params):
        return sep_logcdf(y, params)

    def logsf(self, y, params):
        return sep_logsf(y, params)

    def quantile(self, u, params):
        return sep_quantile(u, params)

    def sample(self, params, rng, size=None):
        return sep_sample(params, rng, size)
