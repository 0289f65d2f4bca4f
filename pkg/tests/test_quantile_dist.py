import itertools
import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.distributions import (
    KernelKind,
    SEPParams,
    SLParams,
    kernel_registry,
    sep_cdf,
    sep_logcdf,
    sep_logpdf,
    sep_logsf,
    sep_norm_constant,
    sep_quantile,
    sep_sample,
    sep_to_sl_scale,
    sl_cdf,
    sl_logcdf,
    sl_logpdf,
    sl_logsf,
    sl_quantile,
    sl_sample,
    sl_to_sep_scale,
)
from src.exceptions import DomainError

GRID = list(itertools.product([0.1, 0.5, 0.8, 0.9], [0.5, 1.0, 2.0], [0.5, 1.0, 2.0]))


def sep(mu=0.0, sigma=1.0, p0=0.5, k1=1.0, k2=1.0):
    return SEPParams(mu=mu, sigma=sigma, p0=p0, kappa1=k1, kappa2=k2)


def pdf(y, p):
    return math.exp(sep_logpdf(y, p))


def test_norm_constant_known_values():
    assert sep_norm_constant(1.0) == pytest.approx(0.5, rel=1e-14)
    assert sep_norm_constant(2.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-13)
    with pytest.raises(DomainError):
        sep_norm_constant(0.0)


@pytest.mark.parametrize("p0,k1,k2", GRID)
def test_sep_density_normalizes(p0, k1, k2):
    p = sep(mu=0.3, sigma=0.7, p0=p0, k1=k1, k2=k2)
    left, _ = integrate.quad(pdf, -np.inf, 0.3, args=(p,), limit=200)
    right, _ = integrate.quad(pdf, 0.3, np.inf, args=(p,), limit=200)
    assert left == pytest.approx(p0, abs=1e-6)
    assert left + right == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("p0,k1,k2", GRID)
def test_sep_cdf_matches_quadrature(p0, k1, k2):
    p = sep(mu=-0.2, sigma=1.3, p0=p0, k1=k1, k2=k2)
    for y in (-3.0, -0.7, -0.2, 0.4, 2.5):
        left, _ = integrate.quad(pdf, -np.inf, min(y, -0.2), args=(p,), limit=200)
        extra = integrate.quad(pdf, -0.2, y, args=(p,), limit=200)[0] if y > -0.2 else 0.0
        assert sep_cdf(y, p) == pytest.approx(left + extra, abs=1e-6)


@pytest.mark.parametrize("p0,k1,k2", GRID[::4])
def test_sep_cdf_derivative_is_pdf(p0, k1, k2):
    p = sep(p0=p0, k1=k1, k2=k2)
    h = 1e-6
    for y in (-1.5, -0.4, 0.35, 1.8):
        slope = (sep_cdf(y + h, p) - sep_cdf(y - h, p)) / (2 * h)
        assert slope == pytest.approx(pdf(y, p), abs=1e-5)


def test_location_is_p0_quantile():
    for p0, k1, k2 in GRID:
        p = sep(mu=1.5, p0=p0, k1=k1, k2=k2)
        assert sep_cdf(1.5, p) == pytest.approx(p0, abs=1e-15)
        assert sep_logpdf(1.5, p) == pytest.approx(-math.log(p.sigma))


def test_sep_with_kappa_two_is_normal():
    sigma = 1.7
    p = sep(mu=0.4, sigma=sigma, p0=0.5, k1=2.0, k2=2.0)
    sd = sigma / math.sqrt(2.0 * math.pi)
    y = np.linspace(-3.0, 3.0, 41)
    assert np.allclose(sep_logpdf(y, p), stats.norm.logpdf(y, 0.4, sd), atol=1e-9)
    assert np.allclose(sep_cdf(y, p), stats.norm.cdf(y, 0.4, sd), atol=1e-9)


@pytest.mark.parametrize("u", [0.001, 0.1, 0.37, 0.5, 0.8, 0.999])
def test_sep_quantile_with_kappa_two_is_normal(u):
    sigma = 1.7
    p = sep(mu=0.4, sigma=sigma, p0=0.5, k1=2.0, k2=2.0)
    assert sep_quantile(u, p) == pytest.approx(stats.norm.ppf(u, 0.4, sigma / math.sqrt(2.0 * math.pi)), abs=1e-8)



@pytest.mark.parametrize("p0", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_sep_with_unit_tails_is_skew_laplace(p0):
    sigma = 0.8
    p = sep(mu=-0.5, sigma=sigma, p0=p0)
    q = SLParams(mu=-0.5, sigma=sep_to_sl_scale(sigma, p0), p0=p0)
    y = np.linspace(-6.0, 5.0, 57)
    assert np.allclose(sep_logpdf(y, p), sl_logpdf(y, q), atol=1e-10)
    assert np.allclose(sep_cdf(y, p), sl_cdf(y, q), atol=1e-10)
    assert sl_to_sep_scale(q.sigma, p0) == pytest.approx(sigma)


@pytest.mark.parametrize("p0", [0.1, 0.5, 0.8])
def test_scale_mapping_carries_a_constant_jacobian(p0):
    h = 1e-6
    slope = (sep_to_sl_scale(1.0 + h, p0) - sep_to_sl_scale(1.0 - h, p0)) / (2 * h)
    assert slope == pytest.approx(2.0 * p0 * (1.0 - p0), rel=1e-8)

    # a prior on the SL scale, pushed onto the SEP scale
    prior = stats.halfcauchy(scale=math.sqrt(2.0))

    def density(s):
        return prior.pdf(sep_to_sl_scale(s, p0)) * slope

    total, _ = integrate.quad(density, 0.0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-7)
    below, _ = integrate.quad(density, 0.0, 1.3)
    assert below == pytest.approx(prior.cdf(sep_to_sl_scale(1.3, p0)), abs=1e-9)
    assert sl_to_sep_scale(sep_to_sl_scale(1.3, p0), p0) == pytest.approx(1.3)



def test_sl_normalizes_and_hits_quantile():
    q = SLParams(mu=2.0, sigma=0.6, p0=0.3)
    total, _ = integrate.quad(lambda y: math.exp(sl_logpdf(y, q)), -np.inf, np.inf, points=[2.0])
    assert total == pytest.approx(1.0, abs=1e-8)
    assert sl_cdf(2.0, q) == pytest.approx(0.3)


@pytest.mark.parametrize("seed", range(5))
def test_censoring_identities(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        p = sep(
            mu=rng.normal(),
            sigma=rng.uniform(0.2, 3.0),
            p0=rng.uniform(0.05, 0.95),
            k1=rng.uniform(0.3, 3.0),
            k2=rng.uniform(0.3, 3.0),
        )
        a, b = np.sort(rng.normal(p.mu, 2.0, size=2))
        c = rng.normal(p.mu, 2.0)
        # left and right complement
        assert math.exp(sep_logcdf(c, p)) + math.exp(sep_logsf(c, p)) == pytest.approx(1.0, abs=1e-12)
        # interval additivity
        inside = sep_cdf(b, p) - sep_cdf(a, p)
        assert sep_cdf(a, p) + inside + math.exp(sep_logsf(b, p)) == pytest.approx(1.0, abs=1e-12)
        assert math.exp(sep_logcdf(a, p)) == pytest.approx(sep_cdf(a, p), abs=1e-12)


def test_log_tails_do_not_underflow():
    p = sep(sigma=0.1, p0=0.5, k1=2.0, k2=2.0)
    assert math.isfinite(sep_logcdf(-5.0, p))
    assert sep_logcdf(-5.0, p) < -700
    assert math.isfinite(sep_logsf(5.0, p))
    q = SLParams(mu=0.0, sigma=0.01, p0=0.5)
    assert sl_logcdf(-50.0, q) == pytest.approx(math.log(0.5) - 100 * 50.0)
    assert sl_logsf(50.0, q) == pytest.approx(math.log(0.5) - 100 * 50.0)


@pytest.mark.parametrize("p0,k1,k2", GRID[::3])
def test_quantile_inverts_cdf(p0, k1, k2):
    p = sep(mu=0.1, sigma=2.0, p0=p0, k1=k1, k2=k2)
    u = np.array([1e-6, 0.05, p0, 0.5, 0.97, 1 - 1e-6])
    assert np.allclose(sep_cdf(sep_quantile(u, p), p), u, atol=1e-9)
    q = SLParams(mu=0.1, sigma=2.0, p0=p0)
    assert np.allclose(sl_cdf(sl_quantile(u, q), q), u, atol=1e-12)


def test_quantile_rejects_bad_levels():
    with pytest.raises(DomainError):
        sep_quantile(1.0, sep())
    with pytest.raises(DomainError):
        sl_quantile(0.0, SLParams(mu=0.0, sigma=1.0, p0=0.5))


def test_sampling_share_below_mu_is_p0():
    rng = np.random.default_rng(7)
    p = sep(mu=3.0, sigma=1.0, p0=0.8, k1=0.6, k2=2.5)
    draws = sep_sample(p, rng, size=40_000)
    assert np.mean(draws <= 3.0) == pytest.approx(0.8, abs=0.01)
    # Kolmogorov-Smirnov against the closed-form CDF
    assert stats.kstest(draws, lambda y: sep_cdf(y, p)).pvalue > 1e-3

    q = SLParams(mu=0.0, sigma=1.0, p0=0.25)
    sl_draws = sl_sample(q, rng, size=40_000)
    assert np.mean(sl_draws <= 0.0) == pytest.approx(0.25, abs=0.01)


def test_sampling_follows_mu_shape_and_seed():
    p = sep(mu=np.array([0.0, 10.0, 20.0]), sigma=0.01)
    a = sep_sample(p, np.random.default_rng(3))
    b = sep_sample(p, np.random.default_rng(3))
    assert a.shape == (3,)
    assert np.array_equal(a, b)
    assert np.allclose(a, [0.0, 10.0, 20.0], atol=0.2)


def test_parameter_validation():
    with pytest.raises(ValueError):
        sep(sigma=0.0)
    with pytest.raises(ValueError):
        sep(p0=1.0)
    with pytest.raises(ValueError):
        sep(k1=-1.0)


def test_kernel_registry_dispatch():
    assert set(kernel_registry.list_kernels()) == {"sl", "sep"}
    kernel = kernel_registry.get_kernel("sep")
    assert kernel.kind == KernelKind.SEP
    params = kernel.make_params(0.0, 1.0, 0.5, 2.0, 2.0)
    assert kernel.cdf(0.0, params) == pytest.approx(0.5)
    sl = kernel_registry.get_kernel(KernelKind.SL)
    assert sl.logpdf(0.0, sl.make_params(0.0, 1.0, 0.5)) == pytest.approx(math.log(0.5))
    with pytest.raises(DomainError):
        kernel_registry.get_kernel("gaussian")
