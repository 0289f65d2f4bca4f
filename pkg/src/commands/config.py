"""
Run configuration shared by all commands.

Values come from built-in defaults, then the YAML config file, then
command-line flags.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..bridge import BridgeConfig
from ..diagnostics import ResidualConfig
from ..distributions import KernelKind
from ..memory import CacheConfig
from ..model import AffineTransform, DataTransforms, LinkKind, ModelSpec, PriorSpec
from ..sampler import ChainConfig
from ..simstudy import SimStudyConfig

DEFAULT_QUANTILES = (0.10, 0.25, 0.50, 0.75, 0.90)


class DataConfig(BaseModel):
    """Input CSV and the transforms applied when loading it."""

    path: Optional[str] = None
    cd4_column: str = "cd4"
    time_shift: float = 0.0
    time_scale: float = Field(default=1.0, gt=0.0)
    covariate_scaling: Dict[str, AffineTransform] = Field(default_factory=dict)

    @property
    def transforms(self) -> DataTransforms:
        return DataTransforms(
            time=AffineTransform(shift=self.time_shift, scale=self.time_scale),
            covariates=dict(self.covariate_scaling),
        )


class ModelConfig(BaseModel):
    """Link, kernels, quantile levels and priors of the fits."""

    link: LinkKind = LinkKind.LINEAR
    kernels: List[KernelKind] = Field(default_factory=lambda: [KernelKind.SL, KernelKind.SEP])
    quantiles: List[float] = Field(default_factory=lambda: list(DEFAULT_QUANTILES))
    priors: PriorSpec = Field(default_factory=PriorSpec)
    tie_kappas: bool = False

    @field_validator("quantiles")
    @classmethod
    def _check_quantiles(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one quantile is required")
        if any(not 0.0 < p < 1.0 for p in value):
            raise ValueError("quantiles must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("quantiles must be strictly increasing")
        return value

    @field_validator("kernels")
    @classmethod
    def _check_kernels(cls, value: List[KernelKind]) -> List[KernelKind]:
        if not value:
            raise ValueError("at least one kernel is required")
        return list(dict.fromkeys(value))

    def specs(self, cd4_column: str = "cd4") -> List[ModelSpec]:
        """One ModelSpec per (kernel, quantile), kernels outermost."""
        return [
            ModelSpec(
                link=self.link, kernel=kernel, p0=p0, priors=self.priors,
                tie_kappas=self.tie_kappas, cd4_column=cd4_column,
            )
            for kernel in self.kernels
            for p0 in self.quantiles
        ]


class TrajectoryConfig(BaseModel):
    """Time grid (original units) and CD4 reference trajectory for population curves."""

    start: float = 0.0
    stop: float = 196.0
    points: int = Field(default=99, ge=2)
    cd4_baseline: float = 2.25
    cd4_slope: float = 0.001
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    max_draws: int = Field(default=2000, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "TrajectoryConfig":
        if not self.start < self.stop:
            raise ValueError("trajectory grid needs start < stop")
        return self

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def cd4(self, time: np.ndarray) -> np.ndarray:
        return self.cd4_baseline + self.cd4_slope * np.asarray(time, dtype=float)

    def model_inputs(
        self, transforms: DataTransforms, cd4_column: str = "cd4"
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Grid and CD4 reference on the scale the fit saw.

        Returns:
            (grid in original time, grid in model time, CD4 with the
            dataset's covariate scaling applied)
        """
        grid = self.grid()
        return grid, transforms.time.apply(grid), transforms.covariate(cd4_column, self.cd4(grid))


class LoggingConfig(BaseModel):
    directory: str = "./logs"
    level: str = "INFO"


class SimulateConfig(BaseModel):
    """Which scenario the ``simulate`` command draws datasets from."""

    scenario: int = Field(default=0, ge=0)
    n_datasets: int = Field(default=1, ge=1)


class RunConfig(BaseModel):
    """Complete configuration of a command run."""

    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    sampler: ChainConfig = Field(default_factory=ChainConfig)
    bridge: BridgeConfig = Field(default_factory=BridgeConfig)
    diagnostics: ResidualConfig = Field(default_factory=ResidualConfig)
    trajectory: TrajectoryConfig = Field(default_factory=TrajectoryConfig)
    simstudy: SimStudyConfig = Field(default_factory=SimStudyConfig)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)
    cache: CacheConfig = Field(default_factory=CacheConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output_dir: str = "./output"
    workers: int = Field(default=1, ge=1)

    @property
    def seed(self) -> int:
        return self.sampler.seed

    def with_overrides(
        self,
        data: Optional[str] = None,
        quantiles: Optional[List[float]] = None,
        kernels: Optional[List[KernelKind]] = None,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        workers: Optional[int] = None,
        full_scale: Optional[bool] = None,
    ) -> "RunConfig":
        """
        Copy with command-line values applied; ``None`` keeps the current value.

        A seed override reseeds the sampler, bridge, residual and simulation
        streams from one root.
        """
        raw = self.model_dump()
        if data is not None:
            raw["data"]["path"] = data
        if quantiles is not None:
            raw["model"]["quantiles"] = sorted(quantiles)
        if kernels is not None:
            raw["model"]["kernels"] = kernels
        if seed is not None:
            raw["sampler"]["seed"] = seed
            raw["bridge"]["seed"] = seed + 1
            raw["diagnostics"]["seed"] = seed + 2
            for i, scenario in enumerate(raw["simstudy"]["scenarios"]):
                scenario["seed"] = seed + 100 + i
        if out is not None:
            raw["output_dir"] = out
        if workers is not None:
            raw["workers"] = workers
        if full_scale is not None:
            raw["simstudy"]["full_scale"] = full_scale
        return RunConfig.model_validate(raw)


def kernel_choice(value: str) -> List[KernelKind]:
    """``sl``, ``sep`` or ``both`` as a kernel list."""
    if value == "both":
        return [KernelKind.SL, KernelKind.SEP]
    return [KernelKind(value)]
