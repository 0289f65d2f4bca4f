"""
Model specification: link, error kernel, quantile level and priors.
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..distributions import ErrorKernel, KernelKind, KernelParams, QuantileLevel, kernel_registry
from .links import LinkFunction, LinkKind, link_registry
from .priors import KappaPriorKind, PriorSpec


class ModelSpec(BaseModel):
    """Everything that defines a posterior apart from the data."""

    model_config = ConfigDict(frozen=True)

    link: LinkKind = LinkKind.LINEAR
    kernel: KernelKind = KernelKind.SEP
    p0: QuantileLevel = 0.5
    priors: PriorSpec = Field(default_factory=PriorSpec)
    tie_kappas: bool = False
    cd4_column: Optional[str] = "cd4"

    @model_validator(mode="after")
    def _check_link_covariate(self) -> "ModelSpec":
        if self.link == LinkKind.BIEXPONENTIAL and not self.cd4_column:
            raise ValueError("the biexponential link needs a cd4_column")
        return self

    @property
    def link_fn(self) -> LinkFunction:
        return link_registry.get_link(self.link)

    @property
    def kernel_fn(self) -> ErrorKernel:
        return kernel_registry.get_kernel(self.kernel)

    @property
    def has_kappas(self) -> bool:
        return self.kernel == KernelKind.SEP

    @property
    def q(self) -> int:
        return self.link_fn.q

    @property
    def label(self) -> str:
        """Directory-safe label such as ``sep_p0.50``."""
        return f"{self.kernel.value}_p{self.p0:.2f}"

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.model_validate_json(text)

    def with_uniform_kappa(self, lower: float, upper: float) -> "ModelSpec":
        """Copy with a uniform prior on the tail shapes."""
        kappa = self.priors.kappa.model_copy(update={
            "kind": KappaPriorKind.UNIFORM, "lower": lower, "upper": upper,
        })
        return self.model_copy(update={"priors": self.priors.model_copy(update={"kappa": kappa})})


class ErrorModel(BaseModel):
    """Kernel choice, quantile level and error parameters."""

    model_config = ConfigDict(frozen=True)

    kernel: KernelKind
    p0: QuantileLevel
    sigma: float = Field(gt=0.0)
    kappa1: float = Field(default=1.0, gt=0.0)
    kappa2: float = Field(default=1.0, gt=0.0)

    def params(self, mu, validate: bool = True) -> KernelParams:
        """Kernel parameter bundle at location ``mu``."""
        return kernel_registry.get_kernel(self.kernel).make_params(
            np.asarray(mu, dtype=float) if np.ndim(mu) else float(mu),
            self.sigma,
            self.p0,
            self.kappa1,
            self.kappa2,
            validate=validate,
        )
