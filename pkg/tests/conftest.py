import numpy as np
import pytest

from src.model import INTERVAL, LEFT, OBSERVED, RIGHT, Dataset, ModelSpec
from src.sampler import ChainConfig
from src.simstudy import SimScenario, generate_dataset


@pytest.fixture
def scenario():
    return SimScenario(censor_frac=0.1, p0=0.5, kappa1=2.0, kappa2=2.0, n_subjects=6, n_reps=2, seed=5)


@pytest.fixture
def small_data(scenario):
    return generate_dataset(scenario, 123)


@pytest.fixture
def mixed_data():
    """Two subjects with every censoring kind."""
    return Dataset(
        subject=[0, 0, 0, 1, 1, 1],
        time=[0.0, 1.0, 2.0, 0.0, 1.0, 2.0],
        response=[5.1, 4.0, 3.2, 6.0, 4.9, 4.1],
        censor=[OBSERVED, LEFT, OBSERVED, RIGHT, INTERVAL, OBSERVED],
        upper=[np.nan, np.nan, np.nan, np.nan, 5.5, np.nan],
        subject_labels=("a", "b"),
    )


@pytest.fixture
def sep_spec():
    return ModelSpec(kernel="sep", p0=0.5)


@pytest.fixture
def quick_chain():
    return ChainConfig(n_chains=2, n_warmup=200, n_keep=200, seed=11, cov_adapt_start=50, cov_update_every=25)
