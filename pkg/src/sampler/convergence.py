"""
Split-chain R-hat, multi-chain effective sample size and the convergence report.
"""
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from ..exceptions import DiagnosticError, ZeroVarianceError
from .draws import PosteriorDraws


def _chains(draws: Union[PosteriorDraws, np.ndarray], param: Optional[str]) -> np.ndarray:
    if isinstance(draws, PosteriorDraws):
        if param is None:
            raise DiagnosticError("a parameter name is required for PosteriorDraws")
        arr = draws.by_chain(param)
    else:
        arr = np.atleast_2d(np.asarray(draws, dtype=float))
    if arr.shape[1] < 4:
        raise DiagnosticError(f"need at least 4 draws per chain, got {arr.shape[1]}")
    return arr


def _split(arr: np.ndarray) -> np.ndarray:
    half = arr.shape[1] // 2
    return np.vstack([arr[:, :half], arr[:, arr.shape[1] - half:]])


def rhat(draws: Union[PosteriorDraws, np.ndarray], param: Optional[str] = None) -> float:
    """
    Split-chain potential scale reduction factor.

    Args:
        draws: PosteriorDraws (with ``param``) or an (n_chains, n) array
        param: Column name

    Returns:
        R-hat

    Raises:
        ZeroVarianceError: If every split chain is constant
    """
    split = _split(_chains(draws, param))
    m, n = split.shape
    within = float(np.mean(np.var(split, axis=1, ddof=1)))
    if within == 0.0:
        raise ZeroVarianceError(f"zero within-chain variance for '{param or 'array'}'")
    between = n * float(np.var(np.mean(split, axis=1), ddof=1))
    var_hat = (n - 1) / n * within + between / n
    return math.sqrt(var_hat / within)


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance of each row via FFT."""
    n = x.shape[1]
    centered = x - x.mean(axis=1, keepdims=True)
    size = 2 ** int(math.ceil(math.log2(2 * n)))
    spec = np.fft.rfft(centered, n=size, axis=1)
    acov = np.fft.irfft(spec * np.conj(spec), n=size, axis=1)[:, :n]
    return acov / n


def effective_sample_size(draws: Union[PosteriorDraws, np.ndarray], param: Optional[str] = None) -> float:
    """
    Multi-chain effective sample size with Geyer's initial positive sequence.

    Args:
        draws: PosteriorDraws (with ``param``) or an (n_chains, n) array
        param: Column name

    Returns:
        ESS

    Raises:
        ZeroVarianceError: If the draws are constant
    """
    arr = _chains(draws, param)
    m, n = arr.shape
    acov = _autocovariance(arr)
    chain_var = acov[:, 0] * n / (n - 1)
    mean_var = float(np.mean(chain_var))
    var_plus = mean_var * (n - 1) / n
    if m > 1:
        var_plus += float(np.var(arr.mean(axis=1), ddof=1))
    if var_plus <= 0.0 or mean_var == 0.0:
        raise ZeroVarianceError(f"zero variance for '{param or 'array'}'")

    rho = 1.0 - (mean_var - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # sum adjacent pairs while positive, enforcing monotone decrease
    tau = -1.0
    previous = math.inf
    for t in range(0, n - 1, 2):
        pair = rho[t] + rho[t + 1]
        if pair <= 0.0:
            break
        pair = min(pair, previous)
        tau += 2.0 * pair
        previous = pair
    tau = max(tau, 1.0 / math.log10(m * n)) if m * n > 1 else 1.0
    return m * n / tau


class ConvergenceReport(BaseModel):
    """Per-parameter R-hat and ESS plus per-block acceptance rates."""

    rhat: Dict[str, Optional[float]] = Field(default_factory=dict)
    ess: Dict[str, Optional[float]] = Field(default_factory=dict)
    acceptance: Dict[str, float] = Field(default_factory=dict)
    flags: List[str] = Field(default_factory=list)
    monitored: List[str] = Field(default_factory=list)
    rhat_threshold: float = 1.1

    @property
    def max_rhat(self) -> float:
        """Largest R-hat over the monitored parameters (NaN when none)."""
        values = [self.rhat[p] for p in self.monitored if self.rhat.get(p) is not None]
        return max(values) if values else math.nan

    @property
    def converged(self) -> bool:
        undefined = any(self.rhat.get(p) is None for p in self.monitored)
        return not undefined and self.max_rhat <= self.rhat_threshold

    def to_dict(self) -> dict:
        out = self.model_dump()
        out["max_rhat"] = None if math.isnan(self.max_rhat) else self.max_rhat
        out["converged"] = self.converged
        return out

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2))
        return path


def convergence_report(
    draws: PosteriorDraws,
    monitored: Optional[Sequence[str]] = None,
    rhat_threshold: float = 1.1,
) -> ConvergenceReport:
    """
    Diagnostics for every column of ``draws``.

    Args:
        draws: Posterior draws
        monitored: Columns that decide convergence (all columns by default)
        rhat_threshold: R-hat above which the fit is flagged

    Returns:
        ConvergenceReport; undefined diagnostics are ``None`` with a flag
    """
    report = ConvergenceReport(
        monitored=list(monitored or draws.names),
        rhat_threshold=rhat_threshold,
        acceptance={k: float(np.nanmean(v)) for k, v in draws.acceptance.items()},
    )
    for name in draws.names:
        try:
            report.rhat[name] = rhat(draws, name)
            report.ess[name] = effective_sample_size(draws, name)
        except ZeroVarianceError:
            report.rhat[name] = None
            report.ess[name] = None
            report.flags.append(f"zero variance: {name}")
        except DiagnosticError as e:
            report.rhat[name] = None
            report.ess[name] = None
            report.flags.append(f"undefined diagnostics for {name}: {e}")

    if not math.isnan(report.max_rhat) and report.max_rhat > rhat_threshold:
        report.flags.append(f"max R-hat {report.max_rhat:.3f} exceeds {rhat_threshold}")
        logger.warning(f"Convergence flag: max R-hat {report.max_rhat:.3f} > {rhat_threshold}")
    return report
