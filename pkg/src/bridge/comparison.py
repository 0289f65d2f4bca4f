"""
Kernel comparison table on the log marginal likelihood scale.
"""
import math
from typing import Dict, Optional, Tuple

import pandas as pd

from ..distributions import KernelKind
from .bridge_sampler import BridgeResult

COMPARISON_COLUMNS = ["p0", "log_ml_sl", "log_ml_sep", "gap", "evidence", "sl_converged", "sep_converged"]


def evidence_label(gap: float) -> str:
    """Verbal grade of a SEP minus SL log marginal likelihood gap."""
    if not math.isfinite(gap):
        return "undefined"
    size = abs(gap)
    if size < 2.0:
        return "weak"
    favoured = KernelKind.SEP.value if gap > 0 else KernelKind.SL.value
    grade = "positive" if size <= 10.0 else "decisive"
    return f"{grade} for {favoured}"


def compare_models(results: Dict[Tuple[str, float], BridgeResult]) -> pd.DataFrame:
    """
    One row per quantile with both kernels' log marginal likelihoods.

    Args:
        results: Bridge results keyed by (kernel, p0); kernels missing at a
            quantile leave empty cells

    Returns:
        Frame with ``COMPARISON_COLUMNS`` sorted by p0
    """
    quantiles = sorted({p0 for _, p0 in results})
    rows = []
    for p0 in quantiles:
        sl: Optional[BridgeResult] = results.get((KernelKind.SL.value, p0))
        sep: Optional[BridgeResult] = results.get((KernelKind.SEP.value, p0))
        sl_ml = sl.log_ml if sl else math.nan
        sep_ml = sep.log_ml if sep else math.nan
        gap = sep_ml - sl_ml
        rows.append({
            "p0": p0,
            "log_ml_sl": sl_ml,
            "log_ml_sep": sep_ml,
            "gap": gap,
            "evidence": evidence_label(gap),
            "sl_converged": None if sl is None else sl.converged,
            "sep_converged": None if sep is None else sep.converged,
        })
    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
