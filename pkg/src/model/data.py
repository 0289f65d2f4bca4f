"""
Longitudinal datasets with censoring, and the CSV loader.

CSV schema (header required)::

    subject_id,time,response,censor,bound2,cov1..covK

``censor`` is one of ``obs``, ``left``, ``right`` or ``interval``. For
``interval`` rows ``response`` holds the lower and ``bound2`` the upper bound;
otherwise ``bound2`` is empty. Censored rows store the bound in ``response``.
Covariate columns must be complete.
"""
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import SchemaError

REQUIRED_COLUMNS = ("subject_id", "time", "response", "censor", "bound2")


class CensorKind(str, Enum):
    """Censoring status of a row; the integer codes index ``CENSOR_CODES``."""
    OBSERVED = "obs"
    LEFT = "left"
    RIGHT = "right"
    INTERVAL = "interval"


CENSOR_CODES: Tuple[CensorKind, ...] = (
    CensorKind.OBSERVED,
    CensorKind.LEFT,
    CensorKind.RIGHT,
    CensorKind.INTERVAL,
)
OBSERVED, LEFT, RIGHT, INTERVAL = range(4)


class CensorStatus(BaseModel):
    """How a single response was recorded."""

    model_config = ConfigDict(frozen=True)

    kind: CensorKind = CensorKind.OBSERVED
    lower: Optional[float] = None
    upper: Optional[float] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "CensorStatus":
        if self.kind == CensorKind.INTERVAL:
            if self.lower is None or self.upper is None or not self.lower < self.upper:
                raise ValueError("interval censoring requires lower < upper")
        return self

    @classmethod
    def observed(cls) -> "CensorStatus":
        return cls(kind=CensorKind.OBSERVED)

    @classmethod
    def left(cls, bound: float) -> "CensorStatus":
        return cls(kind=CensorKind.LEFT, upper=bound)

    @classmethod
    def right(cls, bound: float) -> "CensorStatus":
        return cls(kind=CensorKind.RIGHT, lower=bound)

    @classmethod
    def interval(cls, lower: float, upper: float) -> "CensorStatus":
        return cls(kind=CensorKind.INTERVAL, lower=lower, upper=upper)


class Observation(BaseModel):
    """One longitudinal record."""

    model_config = ConfigDict(frozen=True)

    subject_index: int = Field(ge=0)
    time: float
    response: float
    censor: CensorStatus = Field(default_factory=CensorStatus.observed)
    covariates: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check_time(self) -> "Observation":
        if not math.isfinite(self.time):
            raise ValueError("observation time must be finite")
        return self


class AffineTransform(BaseModel):
    """``x -> (x - shift) / scale``."""

    shift: float = 0.0
    scale: float = Field(default=1.0, gt=0.0)

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.shift) / self.scale


class DataTransforms(BaseModel):
    """Time and covariate transforms applied at load time."""

    time: AffineTransform = Field(default_factory=AffineTransform)
    covariates: Dict[str, AffineTransform] = Field(default_factory=dict)

    def covariate(self, name: str, values: np.ndarray) -> np.ndarray:
        """``values`` of covariate ``name`` on the model scale."""
        transform = self.covariates.get(name)
        return np.asarray(values, dtype=float) if transform is None else transform.apply(values)


class Dataset(BaseModel):
    """
    Column-oriented longitudinal dataset.

    Rows keep file order; ``subject`` holds contiguous indices from 0 and
    ``censor`` the integer codes of :data:`CENSOR_CODES`. ``upper`` is NaN
    except on interval rows.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    subject: np.ndarray
    time: np.ndarray
    response: np.ndarray
    censor: np.ndarray
    upper: np.ndarray
    covariates: np.ndarray
    covariate_names: Tuple[str, ...] = ()
    subject_labels: Tuple[str, ...] = ()
    transforms: DataTransforms = Field(default_factory=DataTransforms)

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, values: Any) -> Any:
        if isinstance(values, dict):
            n = len(np.asarray(values.get("response", [])))
            values = dict(values)
            values["subject"] = np.asarray(values["subject"], dtype=int)
            values["time"] = np.asarray(values["time"], dtype=float)
            values["response"] = np.asarray(values["response"], dtype=float)
            values["censor"] = np.asarray(values.get("censor", np.zeros(n)), dtype=np.int8)
            values["upper"] = np.asarray(values.get("upper", np.full(n, np.nan)), dtype=float)
            cov = np.asarray(values.get("covariates", np.zeros((n, 0))), dtype=float)
            if cov.size == 0:
                cov = np.zeros((n, 0))
            values["covariates"] = cov.reshape(n, -1)
        return values

    @model_validator(mode="after")
    def _check(self) -> "Dataset":
        n = self.response.shape[0]
        for name in ("subject", "time", "censor", "upper"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"column '{name}' must have length {n}")
        if n == 0:
            raise ValueError("dataset has no observations")
        if not np.all(np.isfinite(self.time)):
            raise ValueError("observation times must be finite")
        present = np.unique(self.subject)
        if present[0] != 0 or not np.array_equal(present, np.arange(present.size)):
            raise ValueError("subject indices must be contiguous from 0")
        if self.covariates.shape[1] != len(self.covariate_names):
            raise ValueError("covariate_names does not match the covariate columns")
        interval = self.censor == INTERVAL
        if not np.all(self.upper[interval] > self.response[interval]):
            raise ValueError("interval rows require lower < upper")
        return self

    @property
    def n_obs(self) -> int:
        return int(self.response.shape[0])

    @property
    def n_subjects(self) -> int:
        return int(self.subject.max()) + 1

    @property
    def counts(self) -> np.ndarray:
        """Observations per subject, J_i."""
        return np.bincount(self.subject, minlength=self.n_subjects)

    @property
    def uncensored(self) -> np.ndarray:
        """Boolean mask of fully observed rows."""
        return self.censor == OBSERVED

    @property
    def censored_share(self) -> float:
        return float(np.mean(~self.uncensored))

    def covariate(self, name: str) -> np.ndarray:
        """
        Column of a named covariate.

        Raises:
            SchemaError: If the covariate is absent
        """
        try:
            return self.covariates[:, self.covariate_names.index(name)]
        except ValueError:
            raise SchemaError(f"covariate '{name}' not found; available: {list(self.covariate_names)}") from None

    def subject_rows(self) -> List[np.ndarray]:
        """Row indices per subject."""
        order = np.argsort(self.subject, kind="stable")
        return np.split(order, np.cumsum(self.counts)[:-1])

    def observations(self) -> List[Observation]:
        """Row-wise view of the dataset."""
        rows = []
        for i in range(self.n_obs):
            code = int(self.censor[i])
            y = float(self.response[i])
            if code == OBSERVED:
                status = CensorStatus.observed()
            elif code == LEFT:
                status = CensorStatus.left(y)
            elif code == RIGHT:
                status = CensorStatus.right(y)
            else:
                status = CensorStatus.interval(y, float(self.upper[i]))
            rows.append(Observation(
                subject_index=int(self.subject[i]),
                time=float(self.time[i]),
                response=y,
                censor=status,
                covariates=tuple(float(c) for c in self.covariates[i]),
            ))
        return rows

    @classmethod
    def from_observations(
        cls,
        observations: Sequence[Observation],
        covariate_names: Sequence[str] = (),
    ) -> "Dataset":
        """Build a dataset from row objects."""
        codes = {kind: code for code, kind in enumerate(CENSOR_CODES)}
        upper = [
            o.censor.upper if o.censor.kind == CensorKind.INTERVAL else np.nan
            for o in observations
        ]
        return cls(
            subject=[o.subject_index for o in observations],
            time=[o.time for o in observations],
            response=[o.response for o in observations],
            censor=[codes[o.censor.kind] for o in observations],
            upper=upper,
            covariates=[o.covariates for o in observations],
            covariate_names=tuple(covariate_names),
            subject_labels=tuple(str(i) for i in sorted({o.subject_index for o in observations})),
        )

    def with_censoring(self, censor: np.ndarray, response: np.ndarray) -> "Dataset":
        """Copy with new censoring codes and responses."""
        return self.model_copy(update={
            "censor": np.asarray(censor, dtype=np.int8),
            "response": np.asarray(response, dtype=float),
        })

    def to_frame(self) -> pd.DataFrame:
        """Dataset in CSV schema order, on the transformed scale."""
        labels = np.asarray(self.subject_labels or [str(i) for i in range(self.n_subjects)])
        frame = pd.DataFrame({
            "subject_id": labels[self.subject],
            "time": self.time,
            "response": self.response,
            "censor": [CENSOR_CODES[c].value for c in self.censor],
            "bound2": self.upper,
        })
        for j, name in enumerate(self.covariate_names):
            frame[name] = self.covariates[:, j]
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        return path

    @classmethod
    def from_csv(
        cls,
        path: Union[str, Path],
        transforms: Optional[DataTransforms] = None,
    ) -> "Dataset":
        """
        Load and validate a dataset CSV.

        Args:
            path: CSV file following the module schema
            transforms: Optional time/covariate transforms

        Returns:
            Validated dataset

        Raises:
            SchemaError: On a missing column or invalid rows (row numbers are
                1-based data rows, header excluded)
        """
        transforms = transforms or DataTransforms()
        try:
            frame = pd.read_csv(path, dtype={"subject_id": str, "censor": str})
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise SchemaError(f"cannot read dataset {path}: {e}") from e

        missing = [c for c in REQUIRED_COLUMNS if c not in frame.columns]
        if missing:
            raise SchemaError(f"missing required columns {missing} in {path}")
        if len(frame) == 0:
            raise SchemaError(f"dataset {path} has no rows")

        cov_names = [c for c in frame.columns if c not in REQUIRED_COLUMNS]
        time = pd.to_numeric(frame["time"], errors="coerce").to_numpy(dtype=float)
        response = pd.to_numeric(frame["response"], errors="coerce").to_numpy(dtype=float)
        bound2 = pd.to_numeric(frame["bound2"], errors="coerce").to_numpy(dtype=float)
        bound2_blank = frame["bound2"].isna().to_numpy()
        censor_text = frame["censor"].fillna("").str.strip().str.lower()
        covariates = (
            frame[cov_names].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=float)
            if cov_names else np.zeros((len(frame), 0))
        )

        valid_kinds = {k.value: code for code, k in enumerate(CENSOR_CODES)}
        codes = censor_text.map(valid_kinds)
        is_interval = (codes == INTERVAL).to_numpy()

        problems: Dict[str, np.ndarray] = {
            "unknown censor value": codes.isna().to_numpy(),
            "missing subject_id": frame["subject_id"].isna().to_numpy(),
            "non-finite time": ~np.isfinite(time),
            "non-finite response": ~np.isfinite(response),
            "interval rows need bound2 > response": is_interval & ~(bound2 > response),
            "bound2 must be empty unless censor is interval": ~is_interval & ~bound2_blank,
            "incomplete covariates": ~np.all(np.isfinite(covariates), axis=1),
        }
        bad = {msg: np.flatnonzero(mask) + 1 for msg, mask in problems.items() if mask.any()}
        if bad:
            rows = sorted({int(r) for idx in bad.values() for r in idx})
            raise SchemaError(f"invalid rows in {path}: {'; '.join(bad)}", rows=rows)

        labels, subject = np.unique(frame["subject_id"].to_numpy(dtype=str), return_inverse=True)
        # keep labels in order of first appearance
        first_seen = np.argsort([np.flatnonzero(subject == k)[0] for k in range(labels.size)], kind="stable")
        remap = np.empty_like(first_seen)
        remap[first_seen] = np.arange(first_seen.size)
        subject = remap[subject]
        labels = labels[first_seen]

        time = transforms.time.apply(time)
        for j, name in enumerate(cov_names):
            covariates[:, j] = transforms.covariate(name, covariates[:, j])

        data = cls(
            subject=subject,
            time=time,
            response=response,
            censor=codes.to_numpy(dtype=np.int8),
            upper=np.where(is_interval, bound2, np.nan),
            covariates=covariates,
            covariate_names=tuple(cov_names),
            subject_labels=tuple(str(s) for s in labels),
            transforms=transforms,
        )
        logger.info(
            f"Loaded {data.n_obs} rows for {data.n_subjects} subjects from {path} "
            f"({data.censored_share:.1%} censored)"
        )
        return data
