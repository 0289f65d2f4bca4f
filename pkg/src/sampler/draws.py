"""
Retained posterior draws and their CSV form.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import SchemaError

LP_COLUMN = "lp__"
CHAIN_COLUMN = "chain"


class PosteriorDraws(BaseModel):
    """
    Retained draws of all chains, stacked chain by chain.

    ``values`` holds constrained parameters in ``names`` order and
    ``unconstrained`` the matching sampler-scale vectors.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    names: List[str]
    values: np.ndarray
    unconstrained: np.ndarray
    log_posterior: np.ndarray
    chain: np.ndarray
    acceptance: Dict[str, List[float]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shapes(self) -> "PosteriorDraws":
        n = self.values.shape[0]
        if self.values.shape != (n, len(self.names)):
            raise ValueError("values do not match the column names")
        if self.unconstrained.shape[0] != n or self.log_posterior.shape != (n,) or self.chain.shape != (n,):
            raise ValueError("draw arrays have inconsistent lengths")
        return self

    @property
    def n_draws(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_chains(self) -> int:
        return int(np.unique(self.chain).size)

    def column(self, name: str) -> np.ndarray:
        if name == LP_COLUMN:
            return self.log_posterior
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise KeyError(f"no column '{name}' in draws") from None

    def by_chain(self, name: str) -> np.ndarray:
        """Column reshaped to (n_chains, draws per chain); trailing extras dropped."""
        col = self.column(name)
        chains = [col[self.chain == c] for c in np.unique(self.chain)]
        n = min(len(c) for c in chains)
        return np.vstack([c[:n] for c in chains])

    def thinned_indices(self, n: int) -> np.ndarray:
        """``n`` evenly spaced draw indices (all draws if fewer)."""
        if n >= self.n_draws:
            return np.arange(self.n_draws)
        return np.unique(np.linspace(0, self.n_draws - 1, n).round().astype(int))

    def summary(self, columns: Optional[Sequence[str]] = None, level: float = 0.95) -> pd.DataFrame:
        """
        Posterior medians and central credible intervals.

        Args:
            columns: Columns to summarize (all by default)
            level: Interval probability

        Returns:
            Frame indexed by parameter with mean, sd, median, lower, upper
        """
        columns = list(columns or self.names)
        tail = 0.5 * (1.0 - level)
        rows = []
        for name in columns:
            x = self.column(name)
            lower, median, upper = np.quantile(x, [tail, 0.5, 1.0 - tail])
            rows.append({
                "parameter": name,
                "mean": float(np.mean(x)),
                "sd": float(np.std(x, ddof=1)) if x.size > 1 else 0.0,
                "median": float(median),
                "lower": float(lower),
                "upper": float(upper),
            })
        return pd.DataFrame(rows).set_index("parameter")

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.names)
        frame.insert(0, CHAIN_COLUMN, self.chain)
        frame[LP_COLUMN] = self.log_posterior
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], layout) -> "PosteriorDraws":
        """
        Read draws written by :meth:`to_csv`.

        Args:
            path: CSV path
            layout: ParameterLayout used to rebuild the unconstrained vectors

        Raises:
            SchemaError: If the columns do not match the layout
        """
        frame = pd.read_csv(path)
        names = layout.column_names
        expected = [CHAIN_COLUMN, *names, LP_COLUMN]
        if list(frame.columns) != expected:
            raise SchemaError(f"draws file {path} does not match the model layout")
        values = frame[names].to_numpy(dtype=float)
        unconstrained = np.vstack([layout.unconstrain(layout.from_row(row)) for row in values])
        return cls(
            names=names,
            values=values,
            unconstrained=unconstrained,
            log_posterior=frame[LP_COLUMN].to_numpy(dtype=float),
            chain=frame[CHAIN_COLUMN].to_numpy(dtype=int),
        )
