"""
Population quantile curves with random effects set to zero.
"""
from typing import Optional

import numpy as np
import pandas as pd

from ..model import ModelSpec, ParameterLayout, population_curve
from ..sampler import PosteriorDraws


def population_band(
    draws: PosteriorDraws,
    spec: ModelSpec,
    n_subjects: int,
    time: np.ndarray,
    cd4: Optional[np.ndarray] = None,
    level: float = 0.95,
    max_draws: int = 2000,
) -> pd.DataFrame:
    """
    Pointwise median and central band of the population curve.

    Args:
        draws: Posterior draws
        spec: Model specification of the fit
        n_subjects: Subjects in the fitted dataset
        time: Time grid on the model scale
        cd4: CD4 values on the grid (ignored by links without CD4)
        level: Band probability
        max_draws: Evenly thinned draws used

    Returns:
        Frame with time, median, lower and upper
    """
    layout = ParameterLayout(spec, n_subjects)
    time = np.asarray(time, dtype=float)
    cd4 = cd4 if spec.link_fn.uses_cd4 else None
    curves = np.vstack([
        np.atleast_1d(population_curve(spec, layout.from_row(draws.values[i]), time, cd4))
        for i in draws.thinned_indices(max_draws)
    ])
    tail = 0.5 * (1.0 - level)
    lower, median, upper = np.quantile(curves, [tail, 0.5, 1.0 - tail], axis=0)
    return pd.DataFrame({"time": time, "median": median, "lower": lower, "upper": upper})
