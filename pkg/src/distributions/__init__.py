"""Quantile-anchored error kernels (SL and SEP)."""
from .base import (
    ErrorKernel,
    KernelKind,
    KernelParams,
    KernelRegistry,
    QuantileLevel,
    kernel_registry,
)
from .sep import (
    SEPKernel,
    SEPParams,
    sep_cdf,
    sep_logcdf,
    sep_logpdf,
    sep_logsf,
    sep_norm_constant,
    sep_quantile,
    sep_sample,
)
from .sl import (
    SLKernel,
    SLParams,
    sep_to_sl_scale,
    sl_cdf,
    sl_logcdf,
    sl_logpdf,
    sl_logsf,
    sl_quantile,
    sl_sample,
    sl_to_sep_scale,
)


def register_all_kernels() -> None:
    """Register the built-in kernels with the global registry."""
    kernel_registry.register(SLKernel())
    kernel_registry.register(SEPKernel())


register_all_kernels()


__all__ = [
    'ErrorKernel',
    'KernelKind',
    'KernelParams',
    'KernelRegistry',
    'QuantileLevel',
    'SEPKernel',
    'SEPParams',
    'SLKernel',
    'SLParams',
    'kernel_registry',
    'register_all_kernels',
    'sep_cdf',
    'sep_logcdf',
    'sep_logpdf',
    'sep_logsf',
    'sep_norm_constant',
    'sep_quantile',
    'sep_sample',
    'sep_to_sl_scale',
    'sl_cdf',
    'sl_logcdf',
    'sl_logpdf',
    'sl_logsf',
    'sl_quantile',
    'sl_sample',
    'sl_to_sep_scale',
]
