import math

import numpy as np
import pytest
from scipy import integrate, special

from src.exceptions import DomainError
from src.numerics import (
    inv_reg_lower_inc_gamma,
    log_gamma,
    log_reg_lower_inc_gamma,
    log_reg_upper_inc_gamma,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)

LIMITS = np.linspace(0.0, 30.0, 20)
SHAPES = np.linspace(0.05, 20.0, 20)


def quad_lower(a, b):
    value, _ = integrate.quad(lambda t: math.exp((b - 1.0) * math.log(t) - t - math.lgamma(b)), 0.0, a, limit=200)
    return value


def test_log_gamma_matches_scipy():
    x = np.array([1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 7.3, 25.0, 171.0, 1e4])
    assert np.allclose(log_gamma(x), special.gammaln(x), rtol=1e-12, atol=1e-12)
    assert isinstance(log_gamma(3.0), float)
    assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)


def test_lower_incomplete_gamma_on_grid():
    a, b = np.meshgrid(LIMITS, SHAPES)
    ours = reg_lower_inc_gamma(a, b)
    assert np.allclose(ours, special.gammainc(b, a), atol=1e-10, rtol=0)


def test_lower_incomplete_gamma_against_quadrature():
    for a in (0.3, 1.0, 4.0, 12.0):
        for b in (0.5, 1.0, 3.0, 9.0):
            assert reg_lower_inc_gamma(a, b) == pytest.approx(quad_lower(a, b), abs=1e-8)


def test_upper_is_complement_and_keeps_tail_accuracy():
    a, b = np.meshgrid(LIMITS, SHAPES)
    total = reg_lower_inc_gamma(a, b) + reg_upper_inc_gamma(a, b)
    assert np.allclose(total, 1.0, atol=1e-12)
    far = reg_upper_inc_gamma(80.0, 2.0)
    assert far == pytest.approx(special.gammaincc(2.0, 80.0), rel=1e-9)
    assert far > 0.0


def test_log_versions():
    assert log_reg_lower_inc_gamma(2.0, 3.0) == pytest.approx(math.log(special.gammainc(3.0, 2.0)), rel=1e-12)
    assert log_reg_upper_inc_gamma(200.0, 1.0) == pytest.approx(-200.0, rel=1e-10)
    assert log_reg_lower_inc_gamma(0.0, 2.0) == -math.inf


def test_boundaries_and_known_values():
    assert reg_lower_inc_gamma(0.0, 2.5) == 0.0
    assert reg_lower_inc_gamma(math.inf, 2.5) == 1.0
    # G(a, 1) = 1 - exp(-a)
    assert reg_lower_inc_gamma(1.7, 1.0) == pytest.approx(1.0 - math.exp(-1.7), rel=1e-13)


@pytest.mark.parametrize("q", [1e-8, 0.01, 0.3, 0.5, 0.9, 0.999999])
@pytest.mark.parametrize("b", [0.05, 0.5, 1.0, 2.5, 20.0])
def test_inverse_round_trip(q, b):
    a = inv_reg_lower_inc_gamma(q, b)
    assert reg_lower_inc_gamma(a, b) == pytest.approx(q, abs=1e-9, rel=1e-9)


def test_inverse_vectorized_and_zero():
    q = np.array([0.0, 0.25, 0.75])
    a = inv_reg_lower_inc_gamma(q, 2.0)
    assert a.shape == (3,)
    assert a[0] == 0.0
    assert np.allclose(a[1:], special.gammaincinv(2.0, q[1:]), rtol=1e-9)


@pytest.mark.parametrize(
    "call",
    [
        lambda: reg_lower_inc_gamma(-1.0, 1.0),
        lambda: reg_lower_inc_gamma(1.0, 0.0),
        lambda: reg_upper_inc_gamma(1.0, -2.0),
        lambda: inv_reg_lower_inc_gamma(1.0, 1.0),
        lambda: inv_reg_lower_inc_gamma(-0.1, 1.0),
        lambda: inv_reg_lower_inc_gamma(0.5, 0.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        reg_lower_inc_gamma(1.0, -1.0)
