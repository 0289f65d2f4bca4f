import json

import numpy as np
import pandas as pd
import pytest

from src.diagnostics import (
    ResidualConfig,
    population_band,
    residual_report,
    scaled_residuals,
    simulate_replicates,
    uniformity_test,
)
from src.exceptions import DomainError
from src.model import ModelParameters, ModelSpec, ParameterLayout
from src.sampler import PosteriorDraws


def constant_draws(spec, n_subjects, params, n=40, chains=2):
    layout = ParameterLayout(spec, n_subjects)
    row = layout.to_row(params)
    values = np.tile(row, (n, 1))
    return PosteriorDraws(
        names=layout.column_names,
        values=values,
        unconstrained=np.vstack([layout.unconstrain(params)] * n),
        log_posterior=np.zeros(n),
        chain=np.repeat(np.arange(chains), n // chains),
    )


def tight_params(n_subjects, beta=(5.0, -0.25), sigma=1e-6, precision=1e6):
    return ModelParameters(
        beta=np.array(beta),
        sigma=sigma,
        kappa1=2.0,
        kappa2=2.0,
        lv=np.eye(2) * precision,
        v=np.zeros((n_subjects, 2)),
    )


def test_residual_extremes_and_ties():
    rng = np.random.default_rng(0)
    reps = rng.normal(size=(99, 3))
    observed = np.array([-100.0, 100.0, 0.0])
    r = scaled_residuals(observed, reps, rng)
    assert r[0] <= 1 / 100
    assert r[1] >= 99 / 100

    tied = scaled_residuals(np.array([2.0]), np.full((49, 1), 2.0), np.random.default_rng(1))
    assert 0.0 <= tied[0] < 1.0


def test_residuals_increase_with_observation():
    reps = np.random.default_rng(2).normal(size=(200, 50))
    low = scaled_residuals(np.zeros(50), reps, np.random.default_rng(7))
    high = scaled_residuals(np.full(50, 0.5), reps, np.random.default_rng(7))
    assert np.all(high >= low)


def test_residual_shape_mismatch():
    with pytest.raises(DomainError):
        scaled_residuals(np.zeros(3), np.zeros((5, 4)), np.random.default_rng(0))


def test_uniformity_extremes():
    d, p, qq = uniformity_test(np.full(100, 0.5))
    assert d == pytest.approx(0.5)
    assert p < 1e-10
    assert qq.shape == (100, 2)

    grid = np.arange(1, 100) / 100
    d, p, qq = uniformity_test(grid)
    assert d < 0.02
    assert p > 0.99
    assert np.allclose(qq[:, 0], grid)
    assert np.allclose(qq[:, 1], grid)

    with pytest.raises(DomainError):
        uniformity_test(np.full(9, 0.5))


def test_degenerate_replicates_follow_population_curve(small_data):
    spec = ModelSpec(kernel="sep", p0=0.5)
    draws = constant_draws(spec, small_data.n_subjects, tight_params(small_data.n_subjects))
    reps = simulate_replicates(draws, small_data, spec, n_sims=60, seed=3)
    assert reps.shape == (60, small_data.n_obs)
    expected = 5.0 - 0.25 * small_data.time
    assert np.allclose(reps, expected[None, :], atol=1e-3)


def test_replicates_are_seeded(small_data):
    spec = ModelSpec(kernel="sl", p0=0.3)
    params = tight_params(small_data.n_subjects, sigma=0.5, precision=1.0)
    params = params.model_copy(update={"kappa1": None, "kappa2": None})
    draws = constant_draws(spec, small_data.n_subjects, params)
    a = simulate_replicates(draws, small_data, spec, n_sims=10, seed=5)
    b = simulate_replicates(draws, small_data, spec, n_sims=10, seed=5)
    c = simulate_replicates(draws, small_data, spec, n_sims=10, seed=6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_no_draws_is_an_error(small_data):
    spec = ModelSpec(kernel="sl")
    layout = ParameterLayout(spec, small_data.n_subjects)
    empty = PosteriorDraws(
        names=layout.column_names,
        values=np.empty((0, layout.dim)),
        unconstrained=np.empty((0, layout.dim)),
        log_posterior=np.empty(0),
        chain=np.empty(0, dtype=int),
    )
    with pytest.raises(DomainError):
        simulate_replicates(empty, small_data, spec)


def test_misplaced_model_is_rejected(tmp_path, small_data):
    spec = ModelSpec(kernel="sep", p0=0.5)
    # replicates sit far above every observation
    params = tight_params(small_data.n_subjects, beta=(50.0, 0.0), sigma=0.1, precision=10.0)
    draws = constant_draws(spec, small_data.n_subjects, params)
    report = residual_report(draws, small_data, spec, ResidualConfig(n_sims=50, seed=1))
    assert report.residuals.size == small_data.uncensored.sum()
    assert np.all(report.residuals < 1 / 51)
    assert report.ks_statistic > 0.9
    assert report.p_value < 1e-6

    paths = report.write(tmp_path, small_data)
    assert [p.name for p in paths] == ["residuals_sep_p0.50.csv", "qq_sep_p0.50.csv", "ks_sep_p0.50.json"]
    frame = pd.read_csv(paths[0])
    assert list(frame.columns) == ["row", "subject", "time", "response", "residual"]
    assert frame["row"].min() >= 1
    summary = json.loads(paths[2].read_text())
    assert summary["n_sims"] == 50
    assert summary["model"] == "sep_p0.50"


def test_population_band_collapses_for_constant_draws():
    spec = ModelSpec(kernel="sep")
    draws = constant_draws(spec, 3, tight_params(3))
    band = population_band(draws, spec, 3, np.array([0.0, 1.0, 2.0]))
    assert list(band.columns) == ["time", "median", "lower", "upper"]
    assert np.allclose(band["median"], [5.0, 4.75, 4.5])
    assert np.allclose(band["lower"], band["upper"])


def test_population_band_uses_cd4_for_biexponential():
    spec = ModelSpec(kernel="sl", link="biexponential")
    params = ModelParameters(
        beta=np.array([np.log(100.0), 0.5, np.log(10.0), 0.05]),
        gamma=0.01,
        sigma=0.2,
        lv=np.eye(4),
        v=np.zeros((2, 4)),
    )
    draws = constant_draws(spec, 2, params, n=10)
    t = np.array([0.0, 10.0])
    cd4 = np.array([2.0, 3.0])
    band = population_band(draws, spec, 2, t, cd4=cd4)
    expected = np.log10(100.0 * np.exp(-0.5 * t) + 10.0 * np.exp(-(0.05 + 0.01 * cd4) * t))
    assert np.allclose(band["median"], expected)
