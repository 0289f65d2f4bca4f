import math

import numpy as np
import pandas as pd
import pytest

from src.exceptions import DomainError
from src.model import LEFT, OBSERVED, Dataset
from src.sampler import ChainConfig
from src.simstudy import (
    FULL_SCALE_REPS,
    MetricsRow,
    ReplicateEstimate,
    SimScenario,
    SimStudyConfig,
    aggregate,
    apply_censoring,
    default_grid,
    generate_dataset,
    metrics_table,
    run_scenario,
    run_study,
    simulate,
)

TINY_CHAIN = ChainConfig(n_chains=2, n_warmup=60, n_keep=60, seed=0, cov_adapt_start=20, cov_update_every=10)


def estimate(rep, median, lower, upper, converged=True, model="sep", parameter="beta[1]", share=0.05):
    return ReplicateEstimate(
        rep=rep, model=model, parameter=parameter, median=median, lower=lower, upper=upper,
        converged=converged, censored_share=share,
    )


def test_default_grid():
    grid = default_grid(n_reps=3, seed=10)
    assert len(grid) == 12
    assert {s.censor_frac for s in grid} == {0.05, 0.10}
    assert {s.p0 for s in grid} == {0.5, 0.8}
    assert {(s.kappa1, s.kappa2) for s in grid} == {(2.0, 0.5), (1.0, 1.0), (0.5, 2.0)}
    assert len({s.label for s in grid}) == 12
    assert [s.seed for s in grid] == list(range(10, 22))
    assert default_grid(n_subjects=4)[0].n_subjects == 4


def test_scenario_validation():
    with pytest.raises(ValueError):
        SimScenario(censor_frac=0.0, p0=0.5, kappa1=1.0, kappa2=1.0)
    with pytest.raises(ValueError):
        SimScenario(censor_frac=0.1, p0=0.5, kappa1=1.0, kappa2=1.0, re_cholesky=((1.0, 0.5), (0.0, 1.0)))
    with pytest.raises(ValueError):
        SimScenario(censor_frac=0.1, p0=0.5, kappa1=1.0, kappa2=1.0, times=())


def test_generated_data_without_noise_is_the_line():
    s = SimScenario(
        censor_frac=0.1, p0=0.5, kappa1=2.0, kappa2=2.0, n_subjects=4,
        sigma=1e-8, re_cholesky=((0.0, 0.0), (0.0, 0.0)),
    )
    data = generate_dataset(s, 0)
    assert data.n_obs == 20
    assert data.n_subjects == 4
    assert data.subject_labels == ("1", "2", "3", "4")
    assert np.all(data.censor == OBSERVED)
    assert np.allclose(data.response, 5.0 - 0.25 * data.time, atol=1e-6)


def test_generated_errors_sit_at_the_quantile():
    s = SimScenario(
        censor_frac=0.1, p0=0.8, kappa1=0.5, kappa2=2.0, n_subjects=400,
        re_cholesky=((0.0, 0.0), (0.0, 0.0)),
    )
    data = generate_dataset(s, 1)
    below = np.mean(data.response <= 5.0 - 0.25 * data.time)
    assert below == pytest.approx(0.8, abs=0.03)


def test_generation_is_reproducible(scenario):
    a = simulate(scenario, 99)
    b = simulate(scenario, 99)
    assert np.array_equal(a.response, b.response)
    assert np.array_equal(a.censor, b.censor)
    assert not np.array_equal(a.response, simulate(scenario, 100).response)


def test_censoring_one_of_twenty():
    y = np.random.default_rng(0).permutation(np.arange(1.0, 21.0))
    data = Dataset(subject=np.repeat(np.arange(4), 5), time=np.tile(np.arange(5.0), 4), response=y)
    censored = apply_censoring(data, 0.05)
    flagged = np.flatnonzero(censored.censor == LEFT)
    assert flagged.size == 1
    assert data.response[flagged[0]] == 1.0
    assert censored.response[flagged[0]] == pytest.approx(1.95)
    assert np.array_equal(np.delete(censored.response, flagged), np.delete(y, flagged))

    two = apply_censoring(data, 0.10)
    assert two.censored_share == pytest.approx(0.10)
    assert sorted(data.response[two.censor == LEFT]) == [1.0, 2.0]


def test_censoring_fraction_bounds(small_data):
    for c in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            apply_censoring(small_data, c)


def test_aggregate_metrics():
    s = SimScenario(censor_frac=0.05, p0=0.5, kappa1=1.0, kappa2=1.0)
    estimates = [
        estimate(0, 4.0, 3.0, 5.5),
        estimate(1, 6.0, 5.5, 7.0),
        estimate(2, 5.5, 4.0, 6.0),
        estimate(3, 40.0, 39.0, 41.0, converged=False),
        estimate(0, -0.25, -0.3, -0.2, parameter="beta[2]"),
    ]
    rows = {(r.model, r.parameter): r for r in aggregate(s, estimates)}
    b1 = rows[("sep", "beta[1]")]
    assert b1.true == 5.0
    assert b1.bias == pytest.approx(0.5 / 3)
    assert b1.rmse == pytest.approx(math.sqrt((1.0 + 1.0 + 0.25) / 3))
    assert b1.length == pytest.approx((2.5 + 1.5 + 2.0) / 3)
    assert b1.coverage == pytest.approx(2 / 3)
    assert b1.n_used == 3 and b1.n_excluded == 1
    assert b1.realized_censoring == pytest.approx(0.05)
    assert rows[("sep", "beta[2]")].coverage == 1.0


def test_all_excluded_gives_nan_metrics():
    s = SimScenario(censor_frac=0.05, p0=0.5, kappa1=1.0, kappa2=1.0)
    rows = aggregate(s, [estimate(0, np.nan, np.nan, np.nan, converged=False)])
    b1 = [r for r in rows if r.parameter == "beta[1]"][0]
    assert math.isnan(b1.bias)
    assert b1.n_used == 0 and b1.n_excluded == 1


def test_rmse_cannot_undercut_bias():
    with pytest.raises(ValueError):
        MetricsRow(
            censor_frac=0.05, p0=0.5, kappa1=1.0, kappa2=1.0, model="sl", parameter="beta[1]",
            true=5.0, bias=1.0, rmse=0.5, length=1.0, coverage=0.9, n_used=10, n_excluded=0,
            realized_censoring=0.05,
        )


def test_metrics_table_layout():
    s = SimScenario(censor_frac=0.10, p0=0.8, kappa1=2.0, kappa2=0.5)
    estimates = [estimate(0, 5.0, 4.0, 6.0, model=m, parameter=p) for m in ("sl", "sep") for p in s.truth]
    table = metrics_table(aggregate(s, estimates))
    assert list(table.columns[:6]) == ["cen", "p0", "kappa1", "kappa2", "param", "true"]
    assert "sl_rmse" in table.columns and "sep_cp" in table.columns
    assert table.columns[-1] == "realized_cen"
    assert len(table) == 2
    assert table.loc[table["param"] == "beta[1]", "sep_bias"].item() == pytest.approx(0.0)


def test_replicate_count_resolution():
    grid = default_grid(n_reps=50)[:2]
    assert [s.n_reps for s in SimStudyConfig(scenarios=grid).resolved_scenarios()] == [50, 50]
    assert SimStudyConfig(scenarios=grid, n_reps=4).resolved_scenarios()[0].n_reps == 4
    assert SimStudyConfig(scenarios=grid, full_scale=True).resolved_scenarios()[1].n_reps == FULL_SCALE_REPS


def test_run_scenario_counts_every_replicate():
    s = SimScenario(censor_frac=0.1, p0=0.5, kappa1=1.0, kappa2=1.0, n_subjects=5, n_reps=2, seed=3)
    rows, estimates = run_scenario(s, TINY_CHAIN)
    assert len(estimates) == 2 * 2 * 2
    assert {(r.model, r.parameter) for r in rows} == {
        (m, p) for m in ("sl", "sep") for p in ("beta[1]", "beta[2]")
    }
    for row in rows:
        assert row.n_used + row.n_excluded == 2
        assert row.realized_censoring == pytest.approx(0.12)


def test_run_study_writes_table(tmp_path):
    s = SimScenario(censor_frac=0.05, p0=0.8, kappa1=2.0, kappa2=0.5, n_subjects=4, n_reps=1, seed=8)
    cfg = SimStudyConfig(scenarios=[s], models=("sl",), chain=TINY_CHAIN)
    table = run_study(cfg, out_path=tmp_path / "metrics.csv")
    written = pd.read_csv(tmp_path / "metrics.csv")
    assert list(written.columns) == list(table.columns)
    assert "sl_bias" in table.columns
    assert not any(c.startswith("sep_") for c in table.columns)
    assert len(table) == 2


@pytest.mark.parametrize("full_scale", [False, True])
def test_run_study_fits_with_its_own_chain(monkeypatch, full_scale):
    import src.simstudy.runner as runner

    seen = []

    def record(s, chain_cfg, *args):
        seen.append((s.n_reps, chain_cfg))
        return [], []

    monkeypatch.setattr(runner, "run_scenario", record)
    big = ChainConfig(n_chains=3, n_warmup=90, n_keep=90)
    s = SimScenario(censor_frac=0.05, p0=0.5, kappa1=1.0, kappa2=1.0, n_reps=2)
    cfg = SimStudyConfig(scenarios=[s], chain=TINY_CHAIN, full_scale_chain=big, full_scale=full_scale)
    run_study(cfg)
    expected = (FULL_SCALE_REPS, big) if full_scale else (2, TINY_CHAIN)
    assert seen == [expected]
