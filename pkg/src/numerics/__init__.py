"""Special functions used by the error kernels."""
from .special_fn import (
    LOG_2PI,
    inv_reg_lower_inc_gamma,
    log_gamma,
    log_reg_lower_inc_gamma,
    log_reg_upper_inc_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)

__all__ = [
    'LOG_2PI',
    'inv_reg_lower_inc_gamma',
    'log_gamma',
    'log_reg_lower_inc_gamma',
    'log_reg_upper_inc_gamma',
    'reg_lower_inc_gamma',
    'reg_upper_inc_gamma',
]
