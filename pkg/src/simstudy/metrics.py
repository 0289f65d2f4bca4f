"""
Frequentist performance of posterior summaries across replicates.
"""
import math
from typing import Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from .scenario import SimScenario


class ReplicateEstimate(BaseModel):
    """Posterior median and interval of one parameter in one replicate fit."""

    rep: int
    model: str
    parameter: str
    median: float
    lower: float
    upper: float
    converged: bool
    censored_share: float


class MetricsRow(BaseModel):
    """Bias, RMSE, mean interval length and coverage of one parameter."""

    censor_frac: float
    p0: float
    kappa1: float
    kappa2: float
    model: str
    parameter: str
    true: float
    bias: float
    rmse: float
    length: float
    coverage: float = Field(ge=0.0, le=1.0)
    n_used: int
    n_excluded: int
    realized_censoring: float

    @model_validator(mode="after")
    def _rmse_bound(self) -> "MetricsRow":
        if self.n_used and self.rmse < abs(self.bias) - 1e-12:
            raise ValueError("RMSE cannot be smaller than |bias|")
        return self


def aggregate(
    s: SimScenario,
    estimates: Iterable[ReplicateEstimate],
) -> List[MetricsRow]:
    """
    Metrics per (model, parameter) over the converged replicates.

    Args:
        s: Scenario holding the true values
        estimates: Replicate estimates of all models

    Returns:
        One MetricsRow per model and parameter; order of ``estimates`` is irrelevant
    """
    estimates = list(estimates)
    shares: Dict[int, float] = {e.rep: e.censored_share for e in estimates}
    realized = float(np.mean(list(shares.values()))) if shares else math.nan
    rows = []
    for model in sorted({e.model for e in estimates}):
        for parameter, truth in s.truth.items():
            group = [e for e in estimates if e.model == model and e.parameter == parameter]
            used = [e for e in group if e.converged]
            if used:
                median = np.array([e.median for e in used])
                lower = np.array([e.lower for e in used])
                upper = np.array([e.upper for e in used])
                error = median - truth
                bias = float(np.mean(error))
                rmse = float(np.sqrt(np.mean(error ** 2)))
                length = float(np.mean(upper - lower))
                coverage = float(np.mean((lower <= truth) & (truth <= upper)))
            else:
                bias = rmse = length = math.nan
                coverage = 0.0
            rows.append(MetricsRow(
                censor_frac=s.censor_frac,
                p0=s.p0,
                kappa1=s.kappa1,
                kappa2=s.kappa2,
                model=model,
                parameter=parameter,
                true=truth,
                bias=bias,
                rmse=rmse,
                length=length,
                coverage=coverage,
                n_used=len(used),
                n_excluded=len(group) - len(used),
                realized_censoring=realized,
            ))
    return rows


KEY_COLUMNS = ["cen", "p0", "kappa1", "kappa2", "param", "true"]
MODEL_METRICS = ["bias", "rmse", "len", "cp", "excluded"]


def metrics_table(rows: Sequence[MetricsRow], models: Sequence[str] = ("sl", "sep")) -> pd.DataFrame:
    """
    Wide table with one line per scenario and parameter.

    Columns are ``KEY_COLUMNS``, then ``<model>_<metric>`` for each model, then
    the realized censoring share.
    """
    records: Dict[tuple, dict] = {}
    for r in rows:
        key = (r.censor_frac, r.p0, r.kappa1, r.kappa2, r.parameter)
        rec = records.setdefault(key, {
            "cen": r.censor_frac, "p0": r.p0, "kappa1": r.kappa1, "kappa2": r.kappa2,
            "param": r.parameter, "true": r.true, "realized_cen": r.realized_censoring,
        })
        rec.update({
            f"{r.model}_bias": r.bias,
            f"{r.model}_rmse": r.rmse,
            f"{r.model}_len": r.length,
            f"{r.model}_cp": r.coverage,
            f"{r.model}_excluded": r.n_excluded,
        })
    columns = KEY_COLUMNS + [f"{m}_{k}" for m in models for k in MODEL_METRICS] + ["realized_cen"]
    return pd.DataFrame(list(records.values()), columns=columns)
