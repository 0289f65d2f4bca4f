import json

import numpy as np
import pytest

from src.exceptions import DiagnosticError, ZeroVarianceError
from src.sampler import PosteriorDraws, convergence_report, effective_sample_size, rhat


def ar1(rng, phi, shape):
    x = np.empty(shape)
    x[:, 0] = rng.normal(size=shape[0]) / np.sqrt(1 - phi**2)
    for t in range(1, shape[1]):
        x[:, t] = phi * x[:, t - 1] + rng.normal(size=shape[0])
    return x


def make_draws(columns, n_chains=4):
    values = np.column_stack([c.reshape(-1) for c in columns.values()])
    n = values.shape[0]
    return PosteriorDraws(
        names=list(columns),
        values=values,
        unconstrained=values,
        log_posterior=np.zeros(n),
        chain=np.repeat(np.arange(n_chains), n // n_chains),
        acceptance={"joint": [0.2, 0.3, 0.25, np.nan]},
    )


def test_iid_chains_have_rhat_near_one():
    x = np.random.default_rng(0).normal(size=(4, 1000))
    assert rhat(x) == pytest.approx(1.0, abs=0.01)
    assert 3000 < effective_sample_size(x) < 5000


def test_autocorrelated_chain_has_lower_ess():
    x = ar1(np.random.default_rng(1), 0.9, (4, 4000))
    expected = 16000 * (1 - 0.9) / (1 + 0.9)
    assert effective_sample_size(x) == pytest.approx(expected, rel=0.35)


def test_shifted_chain_is_flagged():
    x = np.random.default_rng(2).normal(size=(4, 500))
    x[0] += 3.0
    assert rhat(x) > 1.1


def test_drifting_single_chain_is_caught_by_splitting():
    x = np.linspace(0.0, 5.0, 800)[None, :] + np.random.default_rng(3).normal(0, 0.1, size=(1, 800))
    assert rhat(x) > 1.1


def test_constant_and_short_inputs():
    with pytest.raises(ZeroVarianceError):
        rhat(np.ones((2, 100)))
    with pytest.raises(ZeroVarianceError):
        effective_sample_size(np.full((3, 50), 2.5))
    with pytest.raises(DiagnosticError):
        rhat(np.zeros((2, 3)))
    draws = make_draws({"a": np.zeros((4, 10))})
    with pytest.raises(DiagnosticError):
        rhat(draws)


def test_report_flags_and_monitoring(tmp_path):
    rng = np.random.default_rng(4)
    good = rng.normal(size=(4, 300))
    bad = rng.normal(size=(4, 300))
    bad[1] += 4.0
    draws = make_draws({"good": good, "bad": bad, "flat": np.ones((4, 300))})

    report = convergence_report(draws)
    assert report.rhat["flat"] is None
    assert "zero variance: flat" in report.flags
    assert not report.converged
    assert report.acceptance["joint"] == pytest.approx(0.25)

    only_good = convergence_report(draws, monitored=["good"])
    assert only_good.converged
    assert only_good.max_rhat < 1.1

    mixed = convergence_report(draws, monitored=["good", "bad"])
    assert not mixed.converged
    assert any("exceeds" in flag for flag in mixed.flags)

    out = json.loads(mixed.write(tmp_path / "convergence.json").read_text())
    assert out["converged"] is False
    assert out["rhat"]["flat"] is None
    assert out["max_rhat"] == pytest.approx(mixed.max_rhat)


def test_report_with_no_defined_rhat():
    draws = make_draws({"flat": np.ones((4, 20))})
    report = convergence_report(draws)
    assert report.to_dict()["max_rhat"] is None
    assert report.converged is False
