"""
Skew Laplace (asymmetric Laplace) kernel parameterized by its p0-th quantile.
"""
import math
from typing import Optional, Tuple, Union

import numpy as np

from .base import (
    ArrayLike,
    ErrorKernel,
    KernelKind,
    KernelParams,
    as_output,
    check_probability,
)


class SLParams(KernelParams):
    """Location ``mu`` (the p0-th quantile), scale ``sigma`` and level ``p0``."""


def sl_to_sep_scale(sigma_sl: float, p0: float) -> float:
    """SEP scale with kappa1 = kappa2 = 1 that reproduces an SL scale."""
    return sigma_sl / (2.0 * p0 * (1.0 - p0))


def sep_to_sl_scale(sigma_sep: float, p0: float) -> float:
    """SL scale matching an SEP kernel with kappa1 = kappa2 = 1."""
    return 2.0 * p0 * (1.0 - p0) * sigma_sep


def _rates(p: SLParams) -> Tuple[float, float]:
    # exponential rates of the left and right branches
    return 2.0 * (1.0 - p.p0) / p.sigma, 2.0 * p.p0 / p.sigma


def sl_logpdf(y: ArrayLike, p: SLParams) -> ArrayLike:
    """
    Log density of the SL kernel.

    Ties ``y == mu`` take the left branch; both branches agree there.

    Args:
        y: Response value(s)
        p: Kernel parameters

    Returns:
        Log density at ``y``
    """
    d = np.asarray(y, dtype=float) - p.mu
    left_rate, right_rate = _rates(p)
    base = math.log(2.0 * p.p0 * (1.0 - p.p0) / p.sigma)
    out = np.where(d <= 0.0, base + left_rate * d, base - right_rate * d)
    return as_output(out, y, p.mu)


def sl_cdf(y: ArrayLike, p: SLParams) -> ArrayLike:
    """CDF of the SL kernel; equals ``p0`` at ``mu``."""
    d = np.asarray(y, dtype=float) - p.mu
    left_rate, right_rate = _rates(p)
    with np.errstate(over="ignore"):
        left = p.p0 * np.exp(left_rate * np.minimum(d, 0.0))
        right = 1.0 - (1.0 - p.p0) * np.exp(-right_rate * np.maximum(d, 0.0))
    return as_output(np.where(d <= 0.0, left, right), y, p.mu)


def sl_logcdf(y: ArrayLike, p: SLParams) -> ArrayLike:
    """Log CDF of the SL kernel, exact in the far left tail."""
    d = np.asarray(y, dtype=float) - p.mu
    left_rate, right_rate = _rates(p)
    left = math.log(p.p0) + left_rate * np.minimum(d, 0.0)
    right = np.log1p(-(1.0 - p.p0) * np.exp(-right_rate * np.maximum(d, 0.0)))
    return as_output(np.where(d <= 0.0, left, right), y, p.mu)


def sl_logsf(y: ArrayLike, p: SLParams) -> ArrayLike:
    """Log survival function of the SL kernel, exact in the far right tail."""
    d = np.asarray(y, dtype=float) - p.mu
    left_rate, right_rate = _rates(p)
    left = np.log1p(-p.p0 * np.exp(left_rate * np.minimum(d, 0.0)))
    right = math.log(1.0 - p.p0) - right_rate * np.maximum(d, 0.0)
    return as_output(np.where(d <= 0.0, left, right), y, p.mu)


def sl_quantile(u: ArrayLike, p: SLParams) -> ArrayLike:
    """
    Closed-form inverse of :func:`sl_cdf`.

    Args:
        u: Probability level(s) in (0, 1)
        p: Kernel parameters

    Returns:
        Quantile(s) of the kernel

    Raises:
        DomainError: If ``u`` lies outside (0, 1)
    """
    uu = check_probability(u)
    left = p.mu + p.sigma / (2.0 * (1.0 - p.p0)) * np.log(np.minimum(uu, p.p0) / p.p0)
    right = p.mu - p.sigma / (2.0 * p.p0) * np.log((1.0 - np.maximum(uu, p.p0)) / (1.0 - p.p0))
    return as_output(np.where(uu <= p.p0, left, right), u, p.mu)


def sl_sample(
    p: SLParams,
    rng: np.random.Generator,
    size: Optional[Union[int, Tuple[int, ...]]] = None,
) -> ArrayLike:
    """
    Inverse-CDF sampling from the SL kernel.

    Args:
        p: Kernel parameters
        rng: Generator owned by the caller
        size: Output shape; defaults to the shape of ``p.mu``

    Returns:
        Random variate(s)
    """
    if size is None:
        size = np.shape(p.mu) or None
    u = rng.random(size)
    u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
    out = sl_quantile(u, p)
    return float(out) if size is None else np.asarray(out)


class SLKernel(ErrorKernel):
    """Skew Laplace error kernel."""

    @property
    def kind(self) -> KernelKind:
        return KernelKind.SL

    @property
    def shape_names(self) -> Tuple[str, ...]:
        return ("sigma",)

    def make_params(self, mu, sigma, p0, kappa1=1.0, kappa2=1.0, validate=True) -> SLParams:
        if validate:
            return SLParams(mu=mu, sigma=sigma, p0=p0)
        return SLParams.model_construct(mu=mu, sigma=sigma, p0=p0)

    def logpdf(self, y, params):
        return sl_logpdf(y, params)

    def cdf(self, y, params):
        return sl_cdf(y, params)

    def logcdf(self, y, params):
        return sl_logcdf(y, params)

    def logsf(self, y, params):
        return sl_logsf(y, params)

    def quantile(self, u, params):
        return sl_quantile(u, params)

    def sample(self, params, rng, size=None):
        return sl_sample(params, rng, size)
